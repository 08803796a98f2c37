import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hfsp.baselines import (DelayDecision, DelayState, FairScheduler, FairShareState, FifoScheduler,
                            delay_decide, update_deficits)
from hfsp.core import ClusterConfig, JobSpec
from hfsp.engine import TaskPool, run_simulation


class FakePhase:
    def __init__(self, pid, n, locations):
        self.phase_id = pid
        self.pending = TaskPool(n, locations)


def test_delay_launches_local_task_immediately():
    phase = FakePhase("p", 3, {0: frozenset({1}), 1: frozenset({2}), 2: frozenset({2})})
    state = DelayState(max_skips=2)
    assert delay_decide(state, phase, 2) == (DelayDecision.LAUNCH_LOCAL, 1)


def test_delay_skips_d_times_then_goes_remote():
    phase = FakePhase("p", 2, {0: frozenset({1}), 1: frozenset({1})})
    state = DelayState(max_skips=2)
    got = [delay_decide(state, phase, 0)[0] for _ in range(4)]
    assert got == [DelayDecision.SKIP, DelayDecision.SKIP, DelayDecision.LAUNCH_NON_LOCAL,
                   DelayDecision.SKIP]


def test_local_launch_resets_skip_counter():
    phase = FakePhase("p", 2, {0: frozenset({1}), 1: frozenset({0})})
    state = DelayState(max_skips=1)
    delay_decide(state, phase, 5)
    delay_decide(state, phase, 1)
    assert state.counters["p"] == 0


@settings(max_examples=200, deadline=None)
@given(st.lists(st.dictionaries(st.sampled_from("abcde"), st.integers(0, 6), min_size=1),
                min_size=1, max_size=8),
       st.lists(st.floats(0, 10), min_size=8, max_size=8))
def test_deficits_always_sum_to_zero(allocations, dts):
    state = FairShareState(capacity=20)
    for alloc, dt in zip(allocations, dts):
        update_deficits(state, dt, alloc)
        assert sum(state.deficits.values()) == pytest.approx(0.0, abs=1e-6)


def test_fair_share_is_slot_time_split_evenly():
    state = FairShareState(capacity=4)
    update_deficits(state, 10.0, {"a": 3, "b": 1})
    assert state.deficits == {"a": -10.0, "b": 10.0}


def cluster():
    return ClusterConfig(num_machines=2, map_slots_per_machine=1, reduce_slots_per_machine=1,
                         replication_factor=2, heartbeat_interval=1.0)


def test_fifo_runs_jobs_in_submission_order():
    trace = [JobSpec("big", 0.0, 4, 0, 10.0), JobSpec("small", 1.0, 1, 0, 10.0)]
    res = run_simulation(trace, cluster(), FifoScheduler())
    # machine heartbeats are staggered, so allow one interval of slack
    assert res.job("big")["completion"] == pytest.approx(20.0, abs=1.0)
    assert res.job("small")["completion"] == pytest.approx(30.0, abs=1.0)


def test_fair_lets_small_job_in_before_big_job_finishes():
    trace = [JobSpec("big", 0.0, 4, 0, 10.0), JobSpec("small", 1.0, 1, 0, 10.0)]
    res = run_simulation(trace, cluster(), FairScheduler())
    assert res.job("small")["completion"] == pytest.approx(20.0, abs=1.0)
    assert res.job("big")["completion"] == pytest.approx(30.0, abs=1.0)


def test_fair_without_delay_never_skips():
    trace = [JobSpec(f"j{i}", float(i), 3, 0, 5.0) for i in range(4)]
    cfg = ClusterConfig(num_machines=6, map_slots_per_machine=1, reduce_slots_per_machine=1,
                        replication_factor=1, heartbeat_interval=1.0)
    res = run_simulation(trace, cfg, FairScheduler(delay=False))
    first = min(a["launch_time"] for a in res.attempts)
    assert first == 0.0
    assert not res.unfinished


def test_describe_reports_settings():
    assert FairScheduler(max_skips=3).describe()["max_skips"] == 3
    assert FifoScheduler().describe() == {"name": "fifo"}
