"""Post-processing of simulation results: sojourn times, ECDFs, locality,
allocation timelines and cross-seed summaries, plus their CSV/JSON writers.

Output files and their columns:

``sojourns.csv``
    job_id, phase, arrival, completion, sojourn
    (phase is ``map``, ``reduce`` or ``job`` for the aggregate)
``ecdf_<metric>.csv``
    value, fraction
``timeline.csv``
    time, phase_id, kind, slots
``summary.json``
    config echo, seed list and per-scheduler statistics
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import statistics
from collections import Counter
from dataclasses import dataclass

from .core import ValidationError
from .workload import write_atomic

PHASES = ("map", "reduce", "job")


class IncompleteSimulation(ValidationError):
    pass


@dataclass(frozen=True)
class SojournRecord:
    job_id: str
    phase: str
    arrival: float
    completion: float

    @property
    def sojourn(self) -> float:
        return self.completion - self.arrival


def compute_sojourns(result) -> list[SojournRecord]:
    """Per-phase records followed by one aggregate (``job``) record per job.

    A reduce phase is measured from its own arrival (the slowstart moment);
    the aggregate is measured from the job's submit time.
    """
    if result.unfinished:
        raise IncompleteSimulation(f"unfinished jobs: {', '.join(result.unfinished)}")
    out = []
    for j in result.jobs:
        out.append(SojournRecord(j["job_id"], "map", j["submit_time"], j["map_completion"]))
        if j["num_reduce_tasks"]:
            out.append(SojournRecord(j["job_id"], "reduce", j["reduce_arrival"],
                                     j["reduce_completion"]))
        out.append(SojournRecord(j["job_id"], "job", j["submit_time"], j["completion"]))
    return out


def sojourns_by_phase(records) -> dict[str, list[float]]:
    """Sojourn lists per phase; jobs lacking a phase are simply absent from it."""
    out = {p: [] for p in PHASES}
    for r in records:
        out[r.phase].append(r.sojourn)
    return out


def ecdf(values) -> list[tuple[float, float]]:
    """Step points (value, fraction of samples <= value), one per distinct value."""
    xs = sorted(values)
    if not xs:
        raise ValidationError("ecdf of an empty sample")
    n = len(xs)
    counts = Counter(xs)
    steps = []
    seen = 0
    for v in sorted(counts):
        seen += counts[v]
        steps.append((v, seen / n))
    return steps


def locality_fraction(result) -> float:
    """Fraction of launched map tasks that read their block from the local disk."""
    if not result.total_maps:
        raise ValidationError("no map tasks were launched")
    return result.local_maps / result.total_maps


def allocation_timeline(result, kind: str | None = None) -> dict[str, list[tuple[float, int]]]:
    """Slots held by each phase over time, as step series.

    Only the last change at a given instant is kept.
    """
    series: dict[str, list[tuple[float, int]]] = {}
    for time, pid, k, count in result.timeline:
        if kind is not None and k != kind:
            continue
        s = series.setdefault(pid, [])
        if s and s[-1][0] == time:
            s[-1] = (time, count)
        else:
            s.append((time, count))
    return series


def slots_at(series: list[tuple[float, int]], t: float) -> int:
    held = 0
    for time, count in series:
        if time > t:
            break
        held = count
    return held


def _stats(values) -> dict:
    values = sorted(values)
    if not values:
        raise ValidationError("no values to summarize")
    n = len(values)
    p95 = values[min(n - 1, max(0, math.ceil(0.95 * n) - 1))]
    return {"count": n, "mean": math.fsum(values) / n, "median": statistics.median(values),
            "p95": p95}


def summarize(results) -> dict:
    """Per-result statistics plus the across-seed mean and std of each.

    Phases absent from a run (no reduce tasks at all) are skipped for it.
    """
    results = list(results)
    if not results:
        raise ValidationError("summarize needs at least one result")
    runs = []
    for r in results:
        by = sojourns_by_phase(compute_sojourns(r))
        entry = {"seed": r.seed, "scheduler": r.scheduler,
                 "locality": locality_fraction(r) if r.total_maps else None,
                 "makespan": r.end_time}
        for phase, vals in by.items():
            if vals:
                entry[f"sojourn_{phase}"] = _stats(vals)
        runs.append(entry)
    across = {}
    keys = [k for k in runs[0] if k.startswith("sojourn_")]
    for k in keys:
        means = [e[k]["mean"] for e in runs if k in e]
        across[k] = {"mean": math.fsum(means) / len(means),
                     "std": statistics.pstdev(means) if len(means) > 1 else 0.0}
    locs = [e["locality"] for e in runs if e["locality"] is not None]
    if locs:
        across["locality"] = {"mean": math.fsum(locs) / len(locs),
                              "std": statistics.pstdev(locs) if len(locs) > 1 else 0.0}
    return {"runs": runs, "across_seeds": across}


# -- writers ---------------------------------------------------------------

def _fmt(x) -> str:
    # repr gives the shortest round-tripping form, stable across runs
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def sojourns_csv(records) -> str:
    return _csv(["job_id", "phase", "arrival", "completion", "sojourn"],
                [(r.job_id, r.phase, r.arrival, r.completion, r.sojourn) for r in records])


def ecdf_csv(steps) -> str:
    return _csv(["value", "fraction"], steps)


def timeline_csv(result) -> str:
    return _csv(["time", "phase_id", "kind", "slots"], result.timeline)


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True, allow_nan=False) + "\n"


def write_run_outputs(result, outdir) -> list[str]:
    """Write sojourns, ECDFs and the allocation timeline of one run."""
    records = compute_sojourns(result)
    files = {"sojourns.csv": sojourns_csv(records), "timeline.csv": timeline_csv(result)}
    for phase, vals in sojourns_by_phase(records).items():
        if vals:
            files[f"ecdf_{phase}.csv"] = ecdf_csv(ecdf(vals))
    for name, text in files.items():
        write_atomic(os.path.join(outdir, name), text)
    return sorted(files)


def write_summary(summary: dict, path) -> None:
    write_atomic(path, dumps_json(summary))
