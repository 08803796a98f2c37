"""Workload traces: file format, synthetic generation and scaling.

A trace file is a JSON object::

    {"format_version": 1,
     "metadata": {"name": ..., "seed": ..., "generator_spec": {...} | null},
     "jobs": [{"job_id": ..., "submit_time": ..., ...}, ...]}

Job fields are those of :class:`~hfsp.core.JobSpec`; omitted optional fields
take their defaults.
"""

from __future__ import annotations

import json
import math
import os
import random
import tempfile
from dataclasses import dataclass, field, replace

from .core import GB, MB, JobSpec, ValidationError

FORMAT_VERSION = 1


class TraceError(ValidationError):
    """A trace file cannot be read."""


@dataclass
class JobClass:
    probability: float
    map_task_range: tuple[int, int]
    reduce_task_range: tuple[int, int] = (0, 0)
    map_duration_range: tuple[float, float] = (60.0, 60.0)
    reduce_duration_range: tuple[float, float] = (60.0, 60.0)
    label: str = ""
    shuffle_bytes_range: tuple[float, float] = (0.0, 0.0)
    reduce_memory: float = 1.0 * GB

    def validate(self) -> None:
        if not 0 <= self.probability <= 1:
            raise ValidationError(f"class {self.label!r}: probability must be in [0, 1]")
        for name in ("map_task_range", "reduce_task_range", "map_duration_range",
                     "reduce_duration_range", "shuffle_bytes_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValidationError(f"class {self.label!r}: {name} is empty ({lo} > {hi})")
            if lo < 0:
                raise ValidationError(f"class {self.label!r}: {name} must be >= 0")
        if self.map_task_range[0] < 1:
            raise ValidationError(f"class {self.label!r}: map_task_range must start at >= 1")
        if self.map_duration_range[0] <= 0:
            raise ValidationError(f"class {self.label!r}: map durations must be > 0")
        if self.reduce_task_range[1] > 0 and self.reduce_duration_range[0] <= 0:
            raise ValidationError(f"class {self.label!r}: reduce durations must be > 0")

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in self.__dict__.items()}

    @classmethod
    def from_dict(cls, d: dict) -> "JobClass":
        d = {k: tuple(v) if isinstance(v, list) else v for k, v in d.items()}
        return cls(**d)


@dataclass
class WorkloadSpec:
    num_jobs: int
    mean_interarrival: float
    job_classes: list[JobClass]
    name: str = "synthetic"

    def validate(self) -> None:
        if self.num_jobs < 1:
            raise ValidationError("num_jobs must be >= 1")
        if not self.mean_interarrival > 0:
            raise ValidationError("mean_interarrival must be > 0")
        if not self.job_classes:
            raise ValidationError("job_classes must not be empty")
        for c in self.job_classes:
            c.validate()
        total = math.fsum(c.probability for c in self.job_classes)
        if abs(total - 1.0) > 1e-9:
            raise ValidationError(f"class probabilities sum to {total!r}, not 1")

    def to_dict(self) -> dict:
        return {"name": self.name, "num_jobs": self.num_jobs,
                "mean_interarrival": self.mean_interarrival,
                "job_classes": [c.to_dict() for c in self.job_classes]}

    @classmethod
    def from_dict(cls, d: dict) -> "WorkloadSpec":
        d = dict(d)
        classes = [JobClass.from_dict(c) for c in d.pop("job_classes")]
        return cls(job_classes=classes, **d)


@dataclass
class WorkloadTrace:
    jobs: list[JobSpec]
    metadata: dict = field(default_factory=dict)

    def validate(self) -> None:
        if not self.jobs:
            raise ValidationError("empty trace")
        seen = set()
        last = -math.inf
        for i, job in enumerate(self.jobs):
            try:
                job.validate()
            except ValidationError as e:
                raise ValidationError(f"jobs[{i}]: {e}") from None
            if job.job_id in seen:
                raise ValidationError(f"jobs[{i}].job_id: duplicate {job.job_id!r}")
            if job.submit_time < last:
                raise ValidationError(f"jobs[{i}].submit_time: not sorted by submit time")
            seen.add(job.job_id)
            last = job.submit_time

    def to_dict(self) -> dict:
        return {"format_version": FORMAT_VERSION, "metadata": self.metadata,
                "jobs": [j.to_dict() for j in self.jobs]}

    @classmethod
    def from_dict(cls, d: dict) -> "WorkloadTrace":
        if not isinstance(d, dict):
            raise TraceError("trace must be a JSON object")
        version = d.get("format_version", FORMAT_VERSION)
        if version != FORMAT_VERSION:
            raise TraceError(f"format_version: unsupported version {version!r}")
        raw = d.get("jobs")
        if raw is None:
            raise TraceError("missing field: jobs")
        if not isinstance(raw, list):
            raise TraceError("jobs: must be a list")
        if not raw:
            raise TraceError("empty trace")
        jobs = []
        for i, item in enumerate(raw):
            if not isinstance(item, dict):
                raise TraceError(f"jobs[{i}]: must be an object")
            try:
                jobs.append(JobSpec.from_dict(item))
            except (ValidationError, TypeError) as e:
                raise TraceError(f"jobs[{i}]: {e}") from None
        trace = cls(jobs, d.get("metadata") or {})
        try:
            trace.validate()
        except ValidationError as e:
            raise TraceError(str(e)) from None
        return trace


def _uniform_int(rng: random.Random, lo_hi) -> int:
    lo, hi = lo_hi
    return rng.randint(int(lo), int(hi))


def _uniform(rng: random.Random, lo_hi) -> float:
    lo, hi = lo_hi
    return lo if lo == hi else rng.uniform(lo, hi)


def generate_workload(spec: WorkloadSpec, seed: int) -> WorkloadTrace:
    """Draw ``spec.num_jobs`` jobs with exponential inter-arrival times."""
    spec.validate()
    arrivals = random.Random(f"{seed}/workload/arrivals")
    classes = random.Random(f"{seed}/workload/classes")
    sizes = random.Random(f"{seed}/workload/sizes")
    weights = [c.probability for c in spec.job_classes]
    width = len(str(spec.num_jobs - 1))
    jobs = []
    t = 0.0
    for i in range(spec.num_jobs):
        if i:
            t += arrivals.expovariate(1.0 / spec.mean_interarrival)
        c = classes.choices(spec.job_classes, weights)[0]
        n_red = _uniform_int(sizes, c.reduce_task_range)
        jobs.append(JobSpec(
            job_id=f"job{i:0{width}d}",
            submit_time=round(t, 6),
            num_map_tasks=_uniform_int(sizes, c.map_task_range),
            num_reduce_tasks=n_red,
            map_task_duration=round(_uniform(sizes, c.map_duration_range), 6),
            reduce_task_duration=round(_uniform(sizes, c.reduce_duration_range), 6) if n_red else 0.0,
            shuffle_bytes_per_reduce=round(_uniform(sizes, c.shuffle_bytes_range)) if n_red else 0.0,
            reduce_task_memory=c.reduce_memory,
            job_class_label=c.label,
        ))
    meta = {"name": spec.name, "seed": seed, "generator_spec": spec.to_dict()}
    return WorkloadTrace(jobs, meta)


def scale_trace(trace: WorkloadTrace, machine_ratio: float) -> WorkloadTrace:
    """Scale task counts by ``machine_ratio``, rounding up.

    Map counts never drop below one.  Map-only jobs stay map-only.
    """
    if not machine_ratio > 0:
        raise ValidationError("machine_ratio must be > 0")
    if machine_ratio == 1:
        return WorkloadTrace([replace(j) for j in trace.jobs], dict(trace.metadata))

    def scaled(n):
        # tolerate float noise such as 0.1 * 500 = 50.00000000000001
        return math.ceil(round(n * machine_ratio, 9))

    jobs = [replace(j, num_map_tasks=max(1, scaled(j.num_map_tasks)),
                    num_reduce_tasks=max(1, scaled(j.num_reduce_tasks)) if j.num_reduce_tasks else 0)
            for j in trace.jobs]
    meta = dict(trace.metadata)
    meta["machine_ratio"] = meta.get("machine_ratio", 1) * machine_ratio
    return WorkloadTrace(jobs, meta)


def dumps_trace(trace: WorkloadTrace) -> str:
    return json.dumps(trace.to_dict(), indent=1, sort_keys=True) + "\n"


def write_trace(trace: WorkloadTrace, path) -> None:
    trace.validate()
    write_atomic(path, dumps_trace(trace))


def parse_trace(path) -> WorkloadTrace:
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise TraceError(f"{path}: {e.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise TraceError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from None
    try:
        return WorkloadTrace.from_dict(data)
    except TraceError as e:
        raise TraceError(f"{path}: {e}") from None


def write_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# Presets describe a 100-node cluster; use scale_trace for smaller ones.
PRESET_MACHINES = 100


def fb2009_spec(num_jobs: int = 100, mean_interarrival: float = 13.0) -> WorkloadSpec:
    """Facebook 2009-like mix: mostly tiny map-only jobs, a few huge ones.

    Class shares and task-count bounds follow the published job classes.
    Durations, shuffle sizes and the aggregate reduce bound are our choice.
    """
    small, long_ = (10.0, 30.0), (30.0, 90.0)
    reduce_time, mem = (30.0, 120.0), 0.25 * GB
    return WorkloadSpec(num_jobs, mean_interarrival, [
        JobClass(0.53, (1, 2), (0, 0), small, (0.0, 0.0), "select"),
        JobClass(0.41, (3, 500), (1, 50), small, reduce_time, "aggregate",
                 shuffle_bytes_range=(0.0, 64.0 * MB), reduce_memory=mem),
        JobClass(0.06, (500, 1500), (500, 1000), long_, reduce_time, "transform",
                 shuffle_bytes_range=(0.0, 128.0 * MB), reduce_memory=mem),
    ], name="fb2009")


def fb2010_spec(num_jobs: int = 93, mean_interarrival: float = 38.0) -> WorkloadSpec:
    """Facebook 2010-like mix with small jobs filtered out.

    The published class shares add up to 93%; they are renormalized.
    """
    rows = [
        (39, (1, 1500), (1, 10), "expand"),
        (16, (1, 1500), (11, 100), "expand and transform"),
        (11, (1, 1500), (101, 200), "transform"),
        (10, (1501, 2500), (1, 100), "aggregate"),
        (7, (1501, 2500), (101, 200), "transform"),
        (10, (2501, 4000), (101, 200), "transform"),
    ]
    total = sum(r[0] for r in rows)
    return WorkloadSpec(num_jobs, mean_interarrival, [
        JobClass(p / total, maps, reds, (10.0, 30.0), (30.0, 120.0), label,
                 shuffle_bytes_range=(0.0, 128.0 * MB), reduce_memory=0.25 * GB)
        for p, maps, reds, label in rows
    ], name="fb2010")


PRESETS = {"fb2009": fb2009_spec, "fb2010": fb2010_spec}


def preset_trace(name: str, seed: int, machines: int = PRESET_MACHINES, **overrides) -> WorkloadTrace:
    """Generate a preset workload and scale it to ``machines`` machines."""
    try:
        spec = PRESETS[name](**overrides)
    except KeyError:
        raise ValidationError(f"unknown workload preset {name!r}; "
                              f"choose from {sorted(PRESETS)}") from None
    trace = generate_workload(spec, seed)
    if machines != PRESET_MACHINES:
        trace = scale_trace(trace, machines / PRESET_MACHINES)
    return trace


def map_only(trace: WorkloadTrace) -> WorkloadTrace:
    """Drop every job's reduce phase."""
    jobs = [replace(j, num_reduce_tasks=0, reduce_task_duration=0.0, shuffle_bytes_per_reduce=0.0)
            for j in trace.jobs]
    meta = dict(trace.metadata)
    meta["map_only"] = True
    return WorkloadTrace(jobs, meta)
