"""Processor-sharing mirror of the real cluster used to rank phase-jobs.

Every active phase-job has a remaining serialized size (task-seconds) and a
task demand.  Capacity is shared max-min fairly with respect to demands and
weights; a job holding ``a`` virtual slots drains ``a`` task-seconds of work
per second.  Work is spread uniformly over a job's residual tasks, so a job
keeps its full demand until its remaining work reaches zero.

Two allocation granularities are supported: ``integral=True`` hands out
whole virtual slots by weighted round-robin; the default fluid mode is the
limit of that round-robin as the quantum shrinks (water-filling), which is
what processor sharing of a single slot among several jobs requires.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

_EPS = 1e-12


@dataclass
class VirtualJob:
    key: str
    remaining: float
    demand: int
    weight: float = 1.0
    arrival: float = 0.0
    seq: int = 0
    infinite: bool = False
    done: float = 0.0


def _order_key(j):
    return (j.demand, j.arrival, j.seq)


def allocate_max_min(jobs, capacity: float, integral: bool = True) -> dict:
    """Max-min fair split of ``capacity`` among ``jobs``.

    ``jobs`` are objects with ``key``, ``demand``, ``weight``, ``arrival`` and
    ``seq`` attributes.  In integral mode slots are granted one per turn,
    smallest demand first, each job's turns spaced by its weight.
    """
    jobs = [j for j in jobs if j.demand > 0]
    alloc = {j.key: 0 for j in jobs}
    if capacity <= 0 or not jobs:
        return alloc
    if sum(j.demand for j in jobs) <= capacity:
        return {j.key: j.demand for j in jobs}
    if not integral:
        return _water_fill(jobs, capacity)
    heap = [(1.0 / j.weight, _order_key(j), j) for j in jobs]
    heapq.heapify(heap)
    left = int(capacity)
    while left > 0 and heap:
        _, order, j = heapq.heappop(heap)
        alloc[j.key] += 1
        left -= 1
        if alloc[j.key] < j.demand:
            heapq.heappush(heap, ((alloc[j.key] + 1) / j.weight, order, j))
    return alloc


def _water_fill(jobs, capacity: float) -> dict:
    # raise a common level L; job j gets min(demand_j, L * weight_j)
    alloc = {}
    rest = sorted(jobs, key=lambda j: (j.demand / j.weight,) + _order_key(j))
    left = float(capacity)
    wsum = sum(j.weight for j in rest)
    for i, j in enumerate(rest):
        level = left / wsum
        if j.demand <= level * j.weight:
            alloc[j.key] = float(j.demand)
            left -= j.demand
            wsum -= j.weight
        else:
            for k in rest[i:]:
                alloc[k.key] = level * k.weight
            break
    return alloc


class VirtualCluster:
    def __init__(self, capacity: int, integral: bool = False, now: float = 0.0):
        self.capacity = capacity
        self.integral = integral
        self.jobs: dict[str, VirtualJob] = {}
        self.last_update = now
        self._seq = 0

    def add(self, key: str, size: float, demand: int, weight: float = 1.0,
            arrival: float | None = None, infinite: bool = False) -> VirtualJob:
        if key in self.jobs:
            raise ValueError(f"{key} already in the virtual cluster")
        self._seq += 1
        arrival = self.last_update if arrival is None else arrival
        job = VirtualJob(key, 0.0 if infinite else max(size, 0.0), demand, weight, arrival,
                         self._seq, infinite)
        self.jobs[key] = job
        return job

    def set_size(self, key: str, size: float, infinite: bool = False) -> None:
        """Replace a job's size estimate; work already aged is kept."""
        job = self.jobs[key]
        job.infinite = infinite
        job.remaining = 0.0 if infinite else max(size - job.done, 0.0)

    def set_demand(self, key: str, demand: int) -> None:
        self.jobs[key].demand = demand

    def remove(self, key: str) -> None:
        self.jobs.pop(key, None)

    def _runnable(self):
        return [j for j in self.jobs.values() if not j.infinite and j.remaining > _EPS]

    def allocation(self) -> dict:
        return allocate_max_min(self._runnable(), self.capacity, self.integral)

    def age(self, now: float) -> None:
        if now < self.last_update - 1e-9:
            raise ValueError("cannot age into the past")
        dt = now - self.last_update
        if dt > 0:
            for key, slots in self.allocation().items():
                job = self.jobs[key]
                work = min(job.remaining, slots * dt)
                job.remaining -= work
                job.done += work
        self.last_update = max(now, self.last_update)

    def project(self) -> list[tuple[str, float]]:
        """Projected completion times under processor sharing, earliest first.

        Jobs whose size is unknown (infinite propensity) follow every other
        job, by arrival.
        """
        now = self.last_update
        rem = {j.key: j.remaining for j in self._runnable()}
        finish = {j.key: now for j in self.jobs.values()
                  if not j.infinite and j.key not in rem}
        while rem:
            live = [self.jobs[k] for k in rem]
            alloc = allocate_max_min(live, self.capacity, self.integral)
            steps = [rem[k] / a for k, a in alloc.items() if a > 0]
            if not steps:
                for k in rem:
                    finish[k] = math.inf
                break
            dt = min(steps)
            now += dt
            for k, a in alloc.items():
                if a <= 0:
                    continue
                r = rem[k] - a * dt
                if r <= _EPS * max(1.0, rem[k]) or rem[k] / a <= dt * (1 + 1e-12):
                    finish[k] = now
                    del rem[k]
                else:
                    rem[k] = r
        order = sorted(finish, key=lambda k: (finish[k], self.jobs[k].arrival, self.jobs[k].seq))
        tail = sorted((j for j in self.jobs.values() if j.infinite),
                      key=lambda j: (j.arrival, j.seq))
        return [(k, finish[k]) for k in order] + [(j.key, math.inf) for j in tail]


def age_jobs(vc: VirtualCluster, now: float) -> None:
    vc.age(now)


def project_completions(vc: VirtualCluster) -> list[tuple[str, float]]:
    return vc.project()
