import pytest

from hfsp.core import GB, ClusterConfig, JobSpec, Kind, ValidationError
from hfsp.engine import run_simulation
from hfsp.estimator import EstimatorConfig, Provenance, SizeEstimate
from hfsp.scheduler import HfspConfig, HfspScheduler, PhaseInfo


def small_cluster(machines=2, maps=2, reduces=2):
    return ClusterConfig(num_machines=machines, map_slots_per_machine=maps,
                         reduce_slots_per_machine=reduces, replication_factor=machines,
                         heartbeat_interval=1.0)


def test_default_training_slots_are_a_tenth_but_at_least_one():
    cfg = HfspConfig()
    assert cfg.training_slots(Kind.MAP, 80) == 8
    assert cfg.training_slots(Kind.MAP, 4) == 1
    assert cfg.training_slots(Kind.MAP, 1) == 0


def test_training_slots_must_leave_room_for_regular_tasks():
    with pytest.raises(ValidationError):
        HfspConfig(training_map_slots=4).training_slots(Kind.MAP, 4)


@pytest.mark.parametrize("bad", [dict(map_preemption="eager"), dict(reduce_preemption="nice"),
                                 dict(max_skips=-1), dict(max_suspended_tasks=-1),
                                 dict(training_reduce_slots=-2)])
def test_bad_hfsp_config_is_rejected(bad):
    with pytest.raises(ValidationError):
        HfspConfig(**bad).validate()


def test_config_round_trips_through_dict():
    cfg = HfspConfig(estimator=EstimatorConfig(alpha=0.3), reduce_preemption="kill")
    assert HfspConfig.from_dict(cfg.to_dict()) == cfg


def test_samples_are_claimed_until_full():
    est = SizeEstimate("p", 10.0, Provenance.INITIAL, 1.0, 10)
    info = PhaseInfo("p", Kind.MAP, 10, 2, est, est)
    assert info.mark(7) and info.mark(3)
    assert not info.mark(0)
    assert info.mark(7)
    assert not info.wants_samples()


def test_small_job_overtakes_big_one():
    trace = [JobSpec("big", 0.0, 40, 0, 10.0), JobSpec("small", 5.0, 2, 0, 10.0)]
    res = run_simulation(trace, small_cluster(), HfspScheduler())
    assert res.job("small")["completion"] < 40.0
    assert res.job("small")["completion"] < res.job("big")["completion"]


def test_estimates_are_logged_for_every_phase():
    trace = [JobSpec("a", 0.0, 6, 2, 10.0, 20.0), JobSpec("b", 3.0, 3, 0, 5.0)]
    res = run_simulation(trace, small_cluster(), HfspScheduler())
    logged = {d["phase_id"] for d in res.decisions if d["event"] == "estimate"}
    assert logged == {"a/map", "a/reduce", "b/map"}


def test_training_estimate_replaces_initial_one():
    trace = [JobSpec("a", 0.0, 20, 0, 10.0)]
    sched = HfspScheduler(HfspConfig(estimator=EstimatorConfig(s=3)))
    res = run_simulation(trace, small_cluster(), sched)
    samples = [a for a in res.attempts if a["is_sample"]]
    assert len(samples) == 3
    trained = [d for d in res.decisions if d["event"] == "estimate"
               and d.get("provenance") == "trained"]
    assert trained and trained[0]["size"] == pytest.approx(200.0, rel=0.35)


def preemption_trace():
    # a long reduce job, then a short one whose initial estimate ranks it first
    return [JobSpec("long", 0.0, 1, 4, 1.0, 300.0, reduce_task_memory=1 * GB),
            JobSpec("short", 20.0, 1, 2, 1.0, 30.0, reduce_task_memory=1 * GB)]


def run_mode(mode):
    cfg = HfspConfig(reduce_preemption=mode, training_reduce_slots=0,
                     estimator=EstimatorConfig(bootstrap_reduce=300.0))
    return run_simulation(preemption_trace(), small_cluster(maps=1, reduces=2),
                          HfspScheduler(cfg), check_invariants=True)


@pytest.mark.parametrize("mode", ["eager", "kill"])
def test_preemption_lets_short_job_finish_first(mode):
    res = run_mode(mode)
    assert res.job("short")["completion"] < 120.0
    assert any(d["event"] == f"preempt_{mode}" for d in res.decisions)


def test_wait_mode_never_preempts():
    res = run_mode("wait")
    assert not [d for d in res.decisions if d["event"].startswith("preempt")]
    assert res.job("short")["completion"] > 300.0


def test_eager_resumes_on_the_same_machine():
    res = run_mode("eager")
    by_task = {}
    for a in res.attempts:
        by_task.setdefault((a["phase_id"], a["index"]), set()).add(a["machine_id"])
    assert all(len(ms) == 1 for ms in by_task.values())


def test_suspended_task_count_is_capped():
    cfg = HfspConfig(reduce_preemption="eager", max_suspended_tasks=1, training_reduce_slots=0,
                     estimator=EstimatorConfig(bootstrap_reduce=300.0))
    res = run_simulation(preemption_trace(), small_cluster(maps=1, reduces=2), HfspScheduler(cfg))
    assert sum(d["event"] == "preempt_eager" for d in res.decisions) <= 1


def test_size_oracle_uses_true_sizes():
    trace = [JobSpec("a", 0.0, 4, 0, 10.0)]
    res = run_simulation(trace, small_cluster(), HfspScheduler(HfspConfig(size_oracle=True)))
    est = [d for d in res.decisions if d["event"] == "estimate"]
    assert est[0]["size"] == 40.0
