import json

import pytest

from hfsp.cli import UsageError, main, parse_seeds


def test_seed_forms():
    assert parse_seeds("3") == [3]
    assert parse_seeds("1..4") == [1, 2, 3, 4]
    assert parse_seeds("1,5,7..8") == [1, 5, 7, 8]
    assert parse_seeds([2, 3]) == [2, 3]


@pytest.mark.parametrize("bad", ["", "5..2", "x"])
def test_bad_seeds_are_rejected(bad):
    with pytest.raises(UsageError):
        parse_seeds(bad)


def test_generate_then_run(tmp_path, capsys):
    trace = tmp_path / "t.json"
    assert main(["generate", "--preset", "fb2009", "--seed", "1", "--machines", "10",
                 "--out", str(trace)]) == 0
    out = tmp_path / "run"
    assert main(["run", "--trace", str(trace), "--scheduler", "fair", "--seeds", "1",
                 "--machines", "10", "--out", str(out)]) == 0
    assert (out / "fair" / "seed1" / "sojourns.csv").exists()
    config = json.loads((out / "config.json").read_text())
    assert config["cluster"]["num_machines"] == 10
    assert config["schedulers"]["fair"]["max_skips"] == 2
    assert "fair" in capsys.readouterr().out


def test_output_root_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("HFSP_OUTPUT_ROOT", str(tmp_path))
    assert main(["scenario", "shared-cluster", "--out", "scen"]) == 0
    assert (tmp_path / "scen" / "summary.json").exists()


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"generator": {"preset": "fb2009"}, "seeds": "1..2",
                               "schedulers": ["fifo"], "cluster": {"num_machines": 20}}))
    out = tmp_path / "o"
    assert main(["compare", "--config", str(cfg), "--seeds", "4", "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["seeds"] == [4]
    assert list(summary["schedulers"]) == ["fifo"]


def test_hfsp_flags_reach_scheduler_config(tmp_path):
    out = tmp_path / "o"
    assert main(["run", "--preset", "fb2009", "--scheduler", "hfsp", "--machines", "20",
                 "--preemption", "kill", "--alpha", "0.5", "--out", str(out)]) == 0
    echoed = json.loads((out / "config.json").read_text())["schedulers"]["hfsp"]
    assert echoed["reduce_preemption"] == "kill"
    assert echoed["estimator"]["alpha"] == 0.5


def test_scenario_with_one_preemption_mode(capsys):
    assert main(["scenario", "preemption-bench", "--preemption", "wait"]) == 0
    body = json.loads(capsys.readouterr().out)
    assert list(body["modes"]) == ["wait"]


@pytest.mark.parametrize("argv", [
    ["run", "--trace", "/nonexistent.json", "--out", "x"],
    ["run", "--preset", "fb2009", "--machines", "0"],
    ["report", "/nonexistent"],
    ["generate", "--out", "x.json"],
    ["compare", "--seeds", "one..two"],
])
def test_bad_input_gives_nonzero_exit_and_message(argv, capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(argv) != 0
    assert "error" in capsys.readouterr().err


def test_bad_config_field(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"colour": "blue"}))
    assert main(["run", "--config", str(cfg)]) == 2
    assert "colour" in capsys.readouterr().err


def test_report_prints_table(tmp_path, capsys):
    out = tmp_path / "o"
    main(["compare", "--preset", "fb2009", "--schedulers", "fifo,fair", "--machines", "20",
          "--out", str(out)])
    capsys.readouterr()
    assert main(["report", str(out)]) == 0
    text = capsys.readouterr().out
    assert "fifo" in text and "fair" in text
