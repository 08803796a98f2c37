"""Reference implementations used only by tests.

Each one reaches the answer by a different route from the package code:
bisection instead of sorting, replication instead of weighting, grid search
instead of closed-form least squares.
"""

from __future__ import annotations

import math


def water_level(demands, weights, capacity, iters=200):
    """Level L with sum(min(d, L*w)) == capacity, found by bisection."""
    if sum(demands) <= capacity:
        return math.inf
    lo, hi = 0.0, max(d / w for d, w in zip(demands, weights))
    for _ in range(iters):
        mid = (lo + hi) / 2
        if sum(min(d, mid * w) for d, w in zip(demands, weights)) < capacity:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def water_fill(demands, weights, capacity):
    level = water_level(demands, weights, capacity)
    return [min(d, level * w) for d, w in zip(demands, weights)]


def fluid_ps_completions(jobs, capacity, start=0.0):
    """Completion time of each job under weighted, demand-capped PS.

    ``jobs`` is a list of (remaining, demand, weight); all are present at
    ``start``.  Completions are found one at a time by stepping to the next
    job to drain.
    """
    rem = {i: float(r) for i, (r, _, _) in enumerate(jobs) if r > 0}
    out = {i: start for i, (r, _, _) in enumerate(jobs) if r <= 0}
    now = start
    while rem:
        ids = sorted(rem)
        rates = water_fill([jobs[i][1] for i in ids], [jobs[i][2] for i in ids], capacity)
        dt = min(rem[i] / r for i, r in zip(ids, rates) if r > 0)
        now += dt
        for i, r in zip(ids, rates):
            rem[i] -= r * dt
        for i in ids:
            if rem[i] <= 1e-9 * max(1.0, jobs[i][0]):
                out[i] = now
                del rem[i]
    return [out[i] for i in range(len(jobs))]


def exchange_violations(alloc, demands, capacity, weights=None):
    """Count ways a slot could move to a poorer job that still wants one.

    An integral max-min allocation admits no pair (j, k) where j is below its
    demand and k, holding at least one slot, would still be at least as well
    off per unit weight after giving one slot to j.  Unused capacity while
    some job is below its demand also counts.
    """
    n = len(demands)
    weights = weights or [1.0] * n
    bad = 0
    if sum(alloc) < min(capacity, sum(demands)):
        bad += 1
    for j in range(n):
        if alloc[j] > demands[j]:
            bad += 1
        if alloc[j] >= demands[j]:
            continue
        for k in range(n):
            if k != j and alloc[k] >= 1 and (alloc[k] - 1) / weights[k] > alloc[j] / weights[j] + 1e-12:
                bad += 1
    return bad


def _grid_min(f, center, half, iters=80, points=21):
    # shrinking 1-d grid around the best point
    for _ in range(iters):
        xs = [center + half * (2 * i / (points - 1) - 1) for i in range(points)]
        center = min(xs, key=f)
        half *= 0.5
    return center


def ls_uniform_grid(values):
    """Uniform[a, b] least-squares fit of sorted values against ECDF positions.

    The line ``x = a + (b - a) q`` is searched by grid in the centered
    parametrisation ``x = m + s (q - 1/2)``, where the two parameters
    separate.  Each grid search minimises the magnitude of its partial
    derivative of the squared error, which (unlike the error itself) is not
    flat at the optimum.
    """
    xs = sorted(values)
    n = len(xs)
    cs = [(i + 0.5) / n - 0.5 for i in range(n)]
    span = max(xs) - min(xs) + 1.0

    def d_m(m):
        return abs(sum(x - m for x in xs))

    def d_s(s):
        return abs(sum((x - s * c) * c for x, c in zip(xs, cs)))

    m = _grid_min(d_m, sum(xs) / n, span)
    s = _grid_min(d_s, 0.0, 4 * span)
    return m - s / 2, m + s / 2


def xi_k_l(xi, k, durations, bootstrap):
    """Initial phase size: k copies of xi times the plain mean task duration."""
    l = sum(durations) / len(durations) if durations else bootstrap
    return sum(xi * l for _ in range(k))


def weighted_shuffle_by_replication(samples, k):
    """``samples`` are (shuffle_time, integer input bytes); each repeated by its bytes."""
    pool = [t for t, b in samples for _ in range(b)]
    return k * sum(pool) / len(pool)


def extrapolate_by_bisection(delta, p):
    """Total run time T with linear progress: delta / T == p."""
    lo, hi = delta, delta / p * 4 + 1
    for _ in range(300):
        mid = (lo + hi) / 2
        if delta / mid > p:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def swap_seconds(mem_bytes, bandwidth=100e6, threshold=5e9, factor=1.2):
    """Per-direction swap time, integrated megabyte by megabyte."""
    mb = int(round(mem_bytes / 1e6))
    step = 1e6
    total = 0.0
    for i in range(mb):
        total += step / bandwidth * (1.0 if (i + 1) * step <= threshold else factor)
    return total


def fluid_ps_with_arrivals(jobs, capacity):
    """Completion times for (arrival, size, demand) jobs under demand-capped PS.

    Advances in small exact segments: between consecutive arrivals or
    completions every active job's rate is constant.
    """
    order = sorted(range(len(jobs)), key=lambda i: jobs[i][0])
    rem, done = {}, {}
    now = 0.0
    while order or rem:
        if not rem:
            now = max(now, jobs[order[0]][0])
        while order and jobs[order[0]][0] <= now:
            i = order.pop(0)
            rem[i] = float(jobs[i][1])
        ids = sorted(rem)
        rates = water_fill([jobs[i][2] for i in ids], [1.0] * len(ids), capacity)
        dt = min(rem[i] / r for i, r in zip(ids, rates))
        if order:
            dt = min(dt, jobs[order[0]][0] - now)
        now += dt
        for i, r in zip(ids, rates):
            rem[i] -= r * dt
            if rem[i] <= 1e-9:
                done[i] = now
                del rem[i]
    return [done[i] for i in range(len(jobs))]
