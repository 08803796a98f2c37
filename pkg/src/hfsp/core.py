"""Domain types shared by the simulator and the schedulers.

A submitted :class:`JobSpec` is split into one map :class:`PhaseJob` and,
when it has reduce tasks, one reduce :class:`PhaseJob`.  Schedulers reason
about phase-jobs only; the two phases of a job compete independently for
their own kind of slot.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass, field, fields

# decimal units: disk and network rates are quoted as 100 MB/s = 1e8 B/s
GB = 10 ** 9
MB = 10 ** 6


class ValidationError(ValueError):
    """A job, trace or configuration violates one of its invariants."""


class ConfigError(ValidationError):
    pass


class Kind(str, enum.Enum):
    MAP = "map"
    REDUCE = "reduce"


class PhaseState(str, enum.Enum):
    TRAINING = "training"
    ESTIMATED = "estimated"
    COMPLETED = "completed"


class TaskState(str, enum.Enum):
    PENDING = "pending"
    RUNNING = "running"
    SUSPENDED = "suspended"
    COMPLETED = "completed"
    KILLED = "killed"


ALLOWED_TRANSITIONS = {
    TaskState.PENDING: {TaskState.RUNNING},
    TaskState.RUNNING: {TaskState.SUSPENDED, TaskState.COMPLETED, TaskState.KILLED},
    TaskState.SUSPENDED: {TaskState.RUNNING, TaskState.KILLED},
    TaskState.COMPLETED: set(),
    TaskState.KILLED: set(),
}

_PHASE_ORDER = [PhaseState.TRAINING, PhaseState.ESTIMATED, PhaseState.COMPLETED]


@dataclass
class JobSpec:
    job_id: str
    submit_time: float
    num_map_tasks: int
    num_reduce_tasks: int = 0
    map_task_duration: float = 60.0
    reduce_task_duration: float = 0.0
    shuffle_bytes_per_reduce: float = 0.0
    reduce_task_memory: float = 1.0 * GB
    weight: float = 1.0
    job_class_label: str = ""

    def validate(self) -> None:
        if not self.job_id:
            raise ValidationError("job_id: must be a non-empty string")
        if not isinstance(self.submit_time, (int, float)) or math.isnan(self.submit_time):
            raise ValidationError(f"{self.job_id}: submit_time must be a number")
        if self.submit_time < 0:
            raise ValidationError(f"{self.job_id}: submit_time must be >= 0")
        if self.num_map_tasks < 1:
            raise ValidationError(f"{self.job_id}: num_map_tasks must be >= 1")
        if self.num_reduce_tasks < 0:
            raise ValidationError(f"{self.job_id}: num_reduce_tasks must be >= 0")
        if self.map_task_duration <= 0:
            raise ValidationError(f"{self.job_id}: map_task_duration must be > 0")
        if self.num_reduce_tasks > 0 and self.reduce_task_duration <= 0:
            raise ValidationError(f"{self.job_id}: reduce_task_duration must be > 0")
        if self.shuffle_bytes_per_reduce < 0:
            raise ValidationError(f"{self.job_id}: shuffle_bytes_per_reduce must be >= 0")
        if self.reduce_task_memory < 0:
            raise ValidationError(f"{self.job_id}: reduce_task_memory must be >= 0")
        if not self.weight > 0:
            raise ValidationError(f"{self.job_id}: weight must be > 0")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, d: dict) -> "JobSpec":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValidationError(f"unknown job field(s): {sorted(unknown)}")
        for name in ("job_id", "submit_time", "num_map_tasks"):
            if name not in d:
                raise ValidationError(f"missing field: {name}")
        return cls(**d)


@dataclass
class PhaseJob:
    """One schedulable phase of a job.

    Reduce phases are created by :func:`split_job` with ``arrival_time`` set
    to ``None``; the simulator fills it in at the slowstart moment.
    """

    phase_id: str
    parent_job: str
    kind: Kind
    num_tasks: int
    arrival_time: float | None
    weight: float = 1.0
    state: PhaseState = PhaseState.TRAINING
    completion_time: float | None = None

    def advance_state(self, new: PhaseState) -> None:
        if _PHASE_ORDER.index(new) < _PHASE_ORDER.index(self.state):
            raise ValidationError(
                f"{self.phase_id}: phase state cannot go from {self.state.value} to {new.value}")
        self.state = new


@dataclass
class ClusterConfig:
    num_machines: int = 20
    map_slots_per_machine: int = 4
    reduce_slots_per_machine: int = 2
    replication_factor: int = 3
    disk_bandwidth: float = 100 * MB
    heartbeat_interval: float = 3.0
    remote_read_penalty: float = 1.3
    slowstart_fraction: float = 0.05
    shuffle_bandwidth: float = 50 * MB
    out_of_band_heartbeat: bool = True
    # reduce functions start only after the parent's last map task finishes
    reduce_barrier: bool = False
    max_time: float = 1e6

    def validate(self) -> None:
        for name in ("num_machines", "map_slots_per_machine", "reduce_slots_per_machine",
                     "replication_factor"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.replication_factor > self.num_machines:
            raise ConfigError("replication_factor must be <= num_machines")
        if self.remote_read_penalty < 1:
            raise ConfigError("remote_read_penalty must be >= 1")
        if self.disk_bandwidth <= 0 or self.shuffle_bandwidth <= 0:
            raise ConfigError("bandwidths must be > 0")
        if self.heartbeat_interval <= 0:
            raise ConfigError("heartbeat_interval must be > 0")
        if not 0 <= self.slowstart_fraction <= 1:
            raise ConfigError("slowstart_fraction must be in [0, 1]")

    @property
    def total_map_slots(self) -> int:
        return self.num_machines * self.map_slots_per_machine

    @property
    def total_reduce_slots(self) -> int:
        return self.num_machines * self.reduce_slots_per_machine

    def slots(self, kind: Kind) -> int:
        return self.total_map_slots if kind is Kind.MAP else self.total_reduce_slots

    def slots_per_machine(self, kind: Kind) -> int:
        return self.map_slots_per_machine if kind is Kind.MAP else self.reduce_slots_per_machine

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, d: dict) -> "ClusterConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown cluster field(s): {sorted(unknown)}")
        return cls(**d)


@dataclass(eq=False)
class TaskAttempt:
    task_id: str
    phase_id: str
    job_id: str
    kind: Kind
    index: int
    machine_id: int
    launch_time: float
    shuffle_work: float
    exec_work: float
    is_sample: bool = False
    is_local: bool = True
    memory_footprint: float = 0.0
    training_slot: bool = False
    state: TaskState = TaskState.PENDING
    suspended_at: float | None = None
    end_time: float | None = None
    # accounting, owned by the simulator
    shuffle_done: float = 0.0
    exec_done: float = 0.0
    exec_start: float | None = None
    accrue_since: float | None = None
    swapping: bool = False
    epoch: int = 0
    slot_time: float = 0.0
    slot_since: float | None = None
    seq: int = 0

    def transition(self, new: TaskState) -> None:
        if new not in ALLOWED_TRANSITIONS[self.state]:
            raise ValidationError(
                f"{self.task_id}: illegal transition {self.state.value} -> {new.value}")
        self.state = new

    @property
    def work(self) -> float:
        return self.shuffle_work + self.exec_work

    def done_at(self, now: float) -> tuple[float, float]:
        """(shuffle seconds done, exec seconds done) as of ``now``."""
        sh, ex = self.shuffle_done, self.exec_done
        if self.accrue_since is not None and now > self.accrue_since:
            dt = now - self.accrue_since
            if sh < self.shuffle_work:
                step = min(dt, self.shuffle_work - sh)
                sh += step
            elif self.exec_start is not None:
                ex = min(self.exec_work, ex + dt)
        return sh, ex

    def progress(self, now: float) -> float:
        """Fraction of total work processed."""
        sh, ex = self.done_at(now)
        return (sh + ex) / self.work

    def exec_progress(self, now: float) -> float:
        """Fraction of the reduce-function stage processed."""
        return self.done_at(now)[1] / self.exec_work

    def exec_elapsed(self, now: float) -> float:
        return self.done_at(now)[1]


@dataclass
class BlockPlacement:
    replicas: dict[tuple[str, int], frozenset[int]] = field(default_factory=dict)

    def machines(self, job_id: str, task_index: int) -> frozenset[int]:
        try:
            return self.replicas[(job_id, task_index)]
        except KeyError:
            raise LookupError(f"no placement for task {task_index} of {job_id}") from None


def split_job(spec: JobSpec) -> tuple[PhaseJob, PhaseJob | None]:
    spec.validate()
    m = PhaseJob(f"{spec.job_id}/map", spec.job_id, Kind.MAP, spec.num_map_tasks,
                 spec.submit_time, spec.weight)
    r = None
    if spec.num_reduce_tasks > 0:
        r = PhaseJob(f"{spec.job_id}/reduce", spec.job_id, Kind.REDUCE,
                     spec.num_reduce_tasks, None, spec.weight)
    return m, r


def place_blocks(spec: JobSpec, cfg: ClusterConfig, rng: random.Random,
                 placement: BlockPlacement | None = None) -> BlockPlacement:
    """Pick ``replication_factor`` distinct machines per map input block."""
    if cfg.replication_factor > cfg.num_machines:
        raise ConfigError("replication_factor must be <= num_machines")
    if placement is None:
        placement = BlockPlacement()
    machines = range(cfg.num_machines)
    for i in range(spec.num_map_tasks):
        placement.replicas[(spec.job_id, i)] = frozenset(
            rng.sample(machines, cfg.replication_factor))
    return placement


def is_local(job_id: str, task_index: int, machine_id: int, placement: BlockPlacement) -> bool:
    return machine_id in placement.machines(job_id, task_index)
