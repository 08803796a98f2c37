import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hfsp.baselines import FifoScheduler
from hfsp.core import ClusterConfig, JobSpec, ValidationError
from hfsp.engine import run_simulation
from hfsp.metrics import (IncompleteSimulation, allocation_timeline, compute_sojourns, ecdf,
                          ecdf_csv, locality_fraction, slots_at, sojourns_by_phase, summarize,
                          write_run_outputs)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=50))
def test_ecdf_is_a_nondecreasing_step_function_ending_at_one(values):
    steps = ecdf(values)
    xs = [x for x, _ in steps]
    fs = [f for _, f in steps]
    assert xs == sorted(set(values))
    assert fs == sorted(fs) and fs[-1] == 1.0
    for x, f in steps:
        assert f == sum(v <= x for v in values) / len(values)


def test_ecdf_of_nothing_is_an_error():
    with pytest.raises(ValidationError):
        ecdf([])


def test_ecdf_csv_uses_round_trip_floats():
    assert ecdf_csv(ecdf([0.1, 0.2])) == "value,fraction\n0.1,0.5\n0.2,1.0\n"


def simple_result():
    trace = [JobSpec("a", 0.0, 2, 1, 10.0, 5.0, reduce_task_memory=0),
             JobSpec("b", 1.0, 1, 0, 4.0)]
    cfg = ClusterConfig(num_machines=1, map_slots_per_machine=2, reduce_slots_per_machine=1,
                        replication_factor=1, heartbeat_interval=1.0)
    return run_simulation(trace, cfg, FifoScheduler())


def test_sojourns_per_phase_and_job():
    res = simple_result()
    recs = compute_sojourns(res)
    by = sojourns_by_phase(recs)
    assert len(by["map"]) == 2 and len(by["reduce"]) == 1 and len(by["job"]) == 2
    job_a = next(r for r in recs if r.job_id == "a" and r.phase == "job")
    assert job_a.sojourn == res.job("a")["completion"]


def test_unfinished_run_cannot_be_summarised():
    res = simple_result()
    res.unfinished = ["a"]
    with pytest.raises(IncompleteSimulation, match="a"):
        compute_sojourns(res)


def test_locality_counts_local_maps():
    res = simple_result()
    assert locality_fraction(res) == 1.0


def test_timeline_steps_keep_last_change_per_instant():
    res = simple_result()
    series = allocation_timeline(res, "map")
    for steps in series.values():
        times = [t for t, _ in steps]
        assert len(times) == len(set(times))
    assert slots_at(series["a/map"], 0.0) >= 1
    assert slots_at(series["a/map"], 1e9) == 0


def test_summary_has_cross_seed_mean_and_std():
    runs = [simple_result(), simple_result()]
    s = summarize(runs)
    assert s["across_seeds"]["sojourn_job"]["std"] == 0.0
    assert len(s["runs"]) == 2


def test_run_outputs_are_written(tmp_path):
    names = write_run_outputs(simple_result(), tmp_path)
    assert names == ["ecdf_job.csv", "ecdf_map.csv", "ecdf_reduce.csv", "sojourns.csv",
                     "timeline.csv"]
    header = (tmp_path / "sojourns.csv").read_text().splitlines()[0]
    assert header == "job_id,phase,arrival,completion,sojourn"
    assert not [p for p in tmp_path.iterdir() if p.name.startswith(".tmp")]
