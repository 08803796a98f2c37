"""Small built-in scenarios with known answers.

``single-slot``
    Three jobs on a single slot, sizes 30/10/10 s arriving at 0/10/15 s.
    Replayed through the full simulator with HFSP and compared with a fluid
    processor-sharing run of the same jobs.
``shared-cluster``
    Three jobs whose task demands cover 100%, 55% and 35% of a cluster.
    Ideal size-based scheduling and processor sharing are computed as fluid
    schedules, without the engine.
``preemption-bench``
    One job with eleven long reduce tasks is overtaken by four small jobs on
    a 4-machine cluster; run under eager, wait and kill preemption.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import GB, ClusterConfig, JobSpec, ValidationError
from .engine import run_simulation
from .estimator import EstimatorConfig
from .scheduler import HfspConfig, HfspScheduler
from .virtual_cluster import VirtualCluster, allocate_max_min

# map stage of the single-slot jobs: short enough to vanish next to a heartbeat
TINY_MAP = 0.001


@dataclass
class FluidJob:
    key: str
    arrival: float
    size: float  # slot-seconds
    demand: float  # maximum slots the job can use at once
    weight: float = 1.0
    seq: int = 0


def _fluid_run(jobs, capacity: float, allocate) -> dict[str, float]:
    """Event-driven fluid schedule; ``allocate(active, remaining)`` -> {key: rate}."""
    pending = sorted(jobs, key=lambda j: (j.arrival, j.key))
    remaining: dict[str, float] = {}
    by_key = {j.key: j for j in jobs}
    done: dict[str, float] = {}
    now = 0.0
    while pending or remaining:
        if not remaining:
            now = max(now, pending[0].arrival)
        while pending and pending[0].arrival <= now:
            j = pending.pop(0)
            remaining[j.key] = j.size
        rates = allocate([by_key[k] for k in remaining], remaining, now)
        horizon = pending[0].arrival - now if pending else math.inf
        steps = [remaining[k] / r for k, r in rates.items() if r > 0]
        dt = min([horizon] + steps)
        if math.isinf(dt):
            raise ValidationError("fluid schedule makes no progress")
        now += dt
        for k, r in rates.items():
            remaining[k] -= r * dt
        for k in [k for k, rem in remaining.items() if rem <= 1e-9 * max(1.0, by_key[k].size)]:
            done[k] = now
            del remaining[k]
    return done


def fluid_ps(jobs, capacity: float) -> dict[str, float]:
    """Completion times under max-min processor sharing, demand-capped."""
    def allocate(active, remaining, now):
        return allocate_max_min(active, capacity, integral=False)
    return _fluid_run(jobs, capacity, allocate)


def fluid_fsp(jobs, capacity: float) -> tuple[dict[str, float], list[tuple[float, dict]]]:
    """Completion times under ideal size-based scheduling with exact sizes.

    Jobs are served in the order of their virtual processor-sharing
    completion; each takes up to its demand and leftover capacity goes to
    the next.  Also returns the rate allocation at each decision instant.
    """
    vc = VirtualCluster(capacity, integral=False)
    known: set[str] = set()
    log = []

    def allocate(active, remaining, now):
        vc.age(now)
        for j in active:
            if j.key not in known:
                vc.add(j.key, j.size, j.demand, j.weight, j.arrival)
                known.add(j.key)
        for key in list(vc.jobs):
            if key not in remaining:
                vc.remove(key)
        left = capacity
        rates = {}
        for key, _ in vc.project():
            if key not in remaining:
                continue
            rates[key] = min(left, next(j.demand for j in active if j.key == key))
            left -= rates[key]
        log.append((now, dict(rates)))
        return rates

    return _fluid_run(jobs, capacity, allocate), log


def mean(values) -> float:
    values = list(values)
    return math.fsum(values) / len(values)


# -- single slot ------------------------------------------------------------------

SINGLE_SLOT_JOBS = (("j1", 0.0, 30.0), ("j2", 10.0, 10.0), ("j3", 15.0, 10.0))


def single_slot_trace() -> list[JobSpec]:
    # one reduce task carries the whole size so eager suspension can act on it
    return [JobSpec(job_id=k, submit_time=t, num_map_tasks=1, num_reduce_tasks=1,
                    map_task_duration=TINY_MAP, reduce_task_duration=size,
                    reduce_task_memory=0.0)
            for k, t, size in SINGLE_SLOT_JOBS]


def single_slot_cluster(heartbeat: float = 0.5) -> ClusterConfig:
    return ClusterConfig(num_machines=1, map_slots_per_machine=1, reduce_slots_per_machine=1,
                         replication_factor=1, heartbeat_interval=heartbeat)


def run_single_slot(heartbeat: float = 0.5) -> dict:
    cfg = single_slot_cluster(heartbeat)
    sched = HfspScheduler(HfspConfig(size_oracle=True, training_map_slots=0,
                                     training_reduce_slots=0))
    result = run_simulation(single_slot_trace(), cfg, sched)
    engine = {j["job_id"]: j["completion"] for j in result.jobs}
    ps = fluid_ps([FluidJob(k, t, s, 1) for k, t, s in SINGLE_SLOT_JOBS], 1)
    fsp, _ = fluid_fsp([FluidJob(k, t, s, 1) for k, t, s in SINGLE_SLOT_JOBS], 1)
    arrivals = {k: t for k, t, _ in SINGLE_SLOT_JOBS}

    def sojourn_mean(done):
        return mean(done[k] - arrivals[k] for k in arrivals)

    return {
        "scenario": "single-slot", "heartbeat_interval": heartbeat, "result": result,
        "engine_completion": engine, "engine_order": sorted(engine, key=engine.get),
        "engine_mean_sojourn": sojourn_mean(engine),
        "fsp_completion": fsp, "fsp_mean_sojourn": sojourn_mean(fsp),
        "ps_completion": ps, "ps_mean_sojourn": sojourn_mean(ps),
    }


# -- shared cluster ------------------------------------------------------------------

SHARED_SLOTS = 20
# (job, arrival, share of the cluster it can use, seconds to finish at that share)
SHARED_JOBS = (("j1", 0.0, 1.00, 30.0), ("j2", 10.0, 0.55, 10.0), ("j3", 13.0, 0.35, 10.0))


def shared_cluster_jobs(slots: int = SHARED_SLOTS) -> list[FluidJob]:
    out = []
    for k, t, share, dur in SHARED_JOBS:
        demand = round(share * slots)
        out.append(FluidJob(k, t, demand * dur, demand))
    return out


def run_shared_cluster(slots: int = SHARED_SLOTS) -> dict:
    jobs = shared_cluster_jobs(slots)
    fsp, log = fluid_fsp(jobs, slots)
    ps = fluid_ps(jobs, slots)
    arrivals = {j.key: j.arrival for j in jobs}
    return {
        "scenario": "shared-cluster", "slots": slots,
        "fsp_completion": fsp, "ps_completion": ps, "fsp_allocations": log,
        "fsp_mean_sojourn": mean(fsp[k] - arrivals[k] for k in arrivals),
        "ps_mean_sojourn": mean(ps[k] - arrivals[k] for k in arrivals),
    }


# -- preemption bench ---------------------------------------------------------------

BENCH_REDUCE = 500.0


def preemption_bench_trace() -> list[JobSpec]:
    """j1 (eleven ~500 s reduce tasks) then four small jobs ten seconds later."""
    jobs = [JobSpec(job_id="j1", submit_time=140.0, num_map_tasks=1, num_reduce_tasks=11,
                    map_task_duration=1.0, reduce_task_duration=BENCH_REDUCE,
                    reduce_task_memory=1.0 * GB)]
    for i, n_red in enumerate((2, 1, 1, 1), start=2):
        jobs.append(JobSpec(job_id=f"j{i}", submit_time=150.0, num_map_tasks=2,
                            num_reduce_tasks=n_red, map_task_duration=30.0,
                            reduce_task_duration=480.0, reduce_task_memory=1.0 * GB))
    return jobs


def preemption_bench_cluster() -> ClusterConfig:
    return ClusterConfig(num_machines=4, map_slots_per_machine=2, reduce_slots_per_machine=2,
                         replication_factor=3)


def preemption_bench_config(preemption: str) -> HfspConfig:
    # the reduce task size is known from earlier jobs, as on a warm cluster
    est = EstimatorConfig(bootstrap_reduce=BENCH_REDUCE)
    return HfspConfig(estimator=est, reduce_preemption=preemption)


def run_preemption_bench(preemption: str = "eager", seed: int = 0) -> dict:
    result = run_simulation(preemption_bench_trace(), preemption_bench_cluster(),
                            HfspScheduler(preemption_bench_config(preemption)), seed=seed)
    soj = {j["job_id"]: j["completion"] - j["submit_time"] for j in result.jobs}
    return {"scenario": "preemption-bench", "preemption": preemption, "result": result,
            "sojourn": soj, "mean_sojourn": mean(soj.values()),
            "completion": {j["job_id"]: j["completion"] for j in result.jobs}}


SCENARIOS = {"single-slot": run_single_slot, "shared-cluster": run_shared_cluster,
             "preemption-bench": run_preemption_bench}
