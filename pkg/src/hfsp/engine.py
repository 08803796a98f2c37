"""Deterministic discrete-event simulation of a slot-based MapReduce cluster.

The engine owns time, slots and task lifecycles.  Schedulers see the
cluster through the :class:`Simulator` object passed to their callbacks and
answer with lists of :class:`Action`; every action is validated before it is
applied, and an invalid one aborts the run with :class:`ProtocolError`.
"""

from __future__ import annotations

import enum
import heapq
import json
import math
import random
from dataclasses import dataclass, field

from .core import (GB, MB, BlockPlacement, ClusterConfig, JobSpec, Kind, PhaseJob, PhaseState,
                   TaskAttempt, TaskState, ValidationError, place_blocks, split_job)


class ProtocolError(RuntimeError):
    """A scheduler asked for something the cluster cannot do."""


class EventKind(str, enum.Enum):
    JOB_ARRIVAL = "JobArrival"
    HEARTBEAT = "Heartbeat"
    SHUFFLE_COMPLETE = "ShuffleComplete"
    TASK_COMPLETION = "TaskCompletion"
    SUSPEND_COMPLETE = "SuspendComplete"
    RESUME_COMPLETE = "ResumeComplete"
    SIMULATION_END = "SimulationEnd"


# same-time ordering: arrivals, then heartbeats, then task lifecycle events
_PRIORITY = {
    EventKind.JOB_ARRIVAL: 0,
    EventKind.HEARTBEAT: 1,
    EventKind.SHUFFLE_COMPLETE: 2,
    EventKind.TASK_COMPLETION: 2,
    EventKind.SUSPEND_COMPLETE: 3,
    EventKind.RESUME_COMPLETE: 3,
    EventKind.SIMULATION_END: 9,
}


@dataclass(order=True)
class Event:
    time: float
    priority: int
    seq: int
    kind: EventKind = field(compare=False)
    payload: tuple = field(compare=False, default=())


class ActionKind(str, enum.Enum):
    LAUNCH = "LaunchTask"
    SUSPEND = "SuspendTask"
    RESUME = "ResumeTask"
    KILL = "KillTask"
    NOOP = "NoOp"


@dataclass(frozen=True)
class Action:
    kind: ActionKind
    phase_id: str | None = None
    task_index: int | None = None
    task_id: str | None = None
    machine_id: int | None = None
    is_sample: bool = False
    training: bool = False


NOOP = Action(ActionKind.NOOP)


def launch(phase_id, machine_id, task_index=None, is_sample=False, training=False):
    return Action(ActionKind.LAUNCH, phase_id=phase_id, task_index=task_index,
                  machine_id=machine_id, is_sample=is_sample, training=training)


def suspend(attempt):
    return Action(ActionKind.SUSPEND, task_id=attempt.task_id, machine_id=attempt.machine_id)


def resume(attempt):
    return Action(ActionKind.RESUME, task_id=attempt.task_id, machine_id=attempt.machine_id)


def kill(attempt):
    return Action(ActionKind.KILL, task_id=attempt.task_id, machine_id=attempt.machine_id)


@dataclass
class PreemptionCostModel:
    disk_bandwidth: float = 100 * MB
    degrade_threshold: float = 5 * GB
    degrade_factor: float = 1.2

    def __post_init__(self):
        if self.disk_bandwidth <= 0:
            raise ValidationError("disk_bandwidth must be > 0")
        if self.degrade_factor < 1:
            raise ValidationError("degrade_factor must be >= 1")
        if self.degrade_threshold < 0:
            raise ValidationError("degrade_threshold must be >= 0")


def suspend_cost(memory_footprint: float, model: PreemptionCostModel) -> float:
    """Seconds to page out (or back in) ``memory_footprint`` bytes.

    Linear at disk speed up to the threshold, ``degrade_factor`` times slower
    for the bytes above it.  Suspend and resume each pay this once.
    """
    if memory_footprint < 0:
        raise ValidationError("memory footprint must be >= 0")
    base = min(memory_footprint, model.degrade_threshold)
    extra = max(0.0, memory_footprint - model.degrade_threshold)
    return (base + extra * model.degrade_factor) / model.disk_bandwidth


def effective_task_duration(nominal: float, kind: Kind, is_local: bool, cfg: ClusterConfig,
                            progress: float = 0.0) -> float:
    """Remaining run time of a task given its locality and progress so far."""
    d = nominal
    if kind is Kind.MAP and not is_local:
        d *= cfg.remote_read_penalty
    return d * (1.0 - progress)


class TaskPool:
    """Pending (never launched, or killed) task indices of one phase.

    Supports "lowest index" and "lowest index stored on machine m" lookups;
    deletions are lazy.
    """

    def __init__(self, n: int, locations: dict[int, frozenset[int]] | None = None):
        self._pending = set(range(n))
        self._heap = list(range(n))
        self._locations = locations
        self._by_machine: dict[int, list[int]] = {}
        if locations:
            for i in range(n):
                for m in locations[i]:
                    self._by_machine.setdefault(m, []).append(i)

    def __len__(self):
        return len(self._pending)

    def __contains__(self, i):
        return i in self._pending

    def lowest(self) -> int | None:
        h = self._heap
        while h and h[0] not in self._pending:
            heapq.heappop(h)
        return h[0] if h else None

    def lowest_local(self, machine: int) -> int | None:
        h = self._by_machine.get(machine)
        while h and h[0] not in self._pending:
            heapq.heappop(h)
        return h[0] if h else None

    def remove(self, i: int) -> None:
        self._pending.remove(i)

    def add(self, i: int) -> None:
        self._pending.add(i)
        heapq.heappush(self._heap, i)
        if self._locations:
            for m in self._locations[i]:
                heapq.heappush(self._by_machine.setdefault(m, []), i)


class Phase:
    """Simulator-side runtime state of a :class:`PhaseJob`."""

    def __init__(self, job: PhaseJob, spec: JobSpec, locations=None):
        self.job = job
        self.spec = spec
        self.pending = TaskPool(job.num_tasks, locations)
        self.holding: dict[str, TaskAttempt] = {}  # attempts occupying a slot
        self.suspended: dict[str, TaskAttempt] = {}
        self.completed = 0
        self.swapping_out = 0  # suspended attempts still paging out, slot not yet free
        self.launched_once = 0
        self.seq = 0

    @property
    def phase_id(self):
        return self.job.phase_id

    @property
    def kind(self):
        return self.job.kind

    @property
    def residual(self) -> int:
        """Tasks not yet completed."""
        return self.job.num_tasks - self.completed

    @property
    def running(self) -> int:
        """Slots held, including slots of attempts still paging out."""
        return len(self.holding)

    @property
    def active_slots(self) -> int:
        """Slots held by attempts in the Running state."""
        return len(self.holding) - self.swapping_out

    def __repr__(self):
        return f"<Phase {self.phase_id} pending={len(self.pending)} holding={self.running}>"


class Machine:
    def __init__(self, machine_id: int, cfg: ClusterConfig):
        self.machine_id = machine_id
        self.capacity = {Kind.MAP: cfg.map_slots_per_machine,
                         Kind.REDUCE: cfg.reduce_slots_per_machine}
        self.holding = {Kind.MAP: {}, Kind.REDUCE: {}}
        self.suspended: dict[str, TaskAttempt] = {}

    def free(self, kind: Kind) -> int:
        return self.capacity[kind] - len(self.holding[kind])


@dataclass
class SimulationResult:
    scheduler: str
    seed: int
    cluster: dict
    scheduler_config: dict
    jobs: list[dict]
    phases: list[dict]
    attempts: list[dict]
    timeline: list[tuple]
    local_maps: int
    total_maps: int
    end_time: float
    unfinished: list[str]
    event_log: list[dict] | None = None
    decisions: list[dict] = field(default_factory=list)

    def job(self, job_id: str) -> dict:
        for j in self.jobs:
            if j["job_id"] == job_id:
                return j
        raise KeyError(job_id)


class Simulator:
    """One simulation run.  Use :func:`run_simulation` for the common case."""

    def __init__(self, trace, cfg: ClusterConfig, scheduler, seed: int = 0,
                 cost_model: PreemptionCostModel | None = None,
                 record_events: bool = False, check_invariants: bool = False):
        jobs = list(getattr(trace, "jobs", trace))
        if not jobs:
            raise ValidationError("empty trace")
        cfg.validate()
        self.cfg = cfg
        self.seed = seed
        self.scheduler = scheduler
        self.cost_model = cost_model or PreemptionCostModel(disk_bandwidth=cfg.disk_bandwidth)
        self.record_events = record_events
        self.check_invariants = check_invariants
        self.now = 0.0
        self.specs: dict[str, JobSpec] = {}
        for spec in jobs:
            spec.validate()
            if spec.job_id in self.specs:
                raise ValidationError(f"duplicate job_id {spec.job_id}")
            self.specs[spec.job_id] = spec
        self.machines = [Machine(i, cfg) for i in range(cfg.num_machines)]
        self.phases: dict[str, Phase] = {}
        self.active: dict[str, Phase] = {}
        self.attempts: dict[str, TaskAttempt] = {}
        self._reduce_pending: dict[str, PhaseJob] = {}
        self._queue: list[Event] = []
        self._seq = 0
        self._attempt_seq = 0
        self._jobs_left = len(self.specs)
        self._timeline: list[tuple] = []
        self._events: list[dict] = []
        self.local_maps = 0
        self.total_maps = 0
        self.decisions: list[dict] = []
        self._placement = BlockPlacement()

    # -- helpers used by schedulers -------------------------------------

    def rng(self, purpose: str) -> random.Random:
        """Independent deterministic stream for ``purpose``."""
        return random.Random(f"{self.seed}/{purpose}")

    def phase(self, phase_id: str) -> Phase:
        return self.phases[phase_id]

    def active_phases(self, kind: Kind | None = None) -> list[Phase]:
        return [p for p in self.active.values() if kind is None or p.kind is kind]

    def free_slots(self, machine_id: int, kind: Kind) -> int:
        return self.machines[machine_id].free(kind)

    def total_free(self, kind: Kind) -> int:
        return sum(m.free(kind) for m in self.machines)

    def suspended_count(self) -> int:
        return sum(len(m.suspended) for m in self.machines)

    def log_decision(self, **record) -> None:
        record.setdefault("time", self.now)
        self.decisions.append(record)

    def map_phase_done(self, job_id: str) -> bool:
        p = self.phases.get(f"{job_id}/map")
        return p is not None and p.job.state is PhaseState.COMPLETED

    def _job_done(self, spec: JobSpec) -> bool:
        for kind in ("map", "reduce")[:1 + (spec.num_reduce_tasks > 0)]:
            p = self.phases.get(f"{spec.job_id}/{kind}")
            if p is None or p.job.state is not PhaseState.COMPLETED:
                return False
        return True

    # -- event queue ---------------------------------------------------

    def _push(self, time: float, kind: EventKind, *payload) -> None:
        self._seq += 1
        heapq.heappush(self._queue, Event(time, _PRIORITY[kind], self._seq, kind, payload))

    def run(self) -> SimulationResult:
        for spec in sorted(self.specs.values(), key=lambda s: s.submit_time):
            self._push(spec.submit_time, EventKind.JOB_ARRIVAL, spec.job_id)
        n = self.cfg.num_machines
        for m in range(n):
            # phase-staggered by machine index
            self._push(self.cfg.heartbeat_interval * m / n, EventKind.HEARTBEAT, m, True)

        handlers = {
            EventKind.JOB_ARRIVAL: self._on_arrival,
            EventKind.HEARTBEAT: self._on_heartbeat,
            EventKind.SHUFFLE_COMPLETE: self._on_shuffle_complete,
            EventKind.TASK_COMPLETION: self._on_task_completion,
            EventKind.SUSPEND_COMPLETE: self._on_suspend_complete,
            EventKind.RESUME_COMPLETE: self._on_resume_complete,
        }
        while self._queue and self._jobs_left > 0:
            ev = heapq.heappop(self._queue)
            if ev.time > self.cfg.max_time:
                break
            if ev.time < self.now:
                raise AssertionError("event queue went back in time")
            self.now = ev.time
            if self.record_events and ev.kind is not EventKind.HEARTBEAT:
                self._events.append({"time": ev.time, "kind": ev.kind.value,
                                     "ids": list(ev.payload)})
            handlers[ev.kind](*ev.payload)
            if self.check_invariants:
                self._check()
        if self.record_events:
            self._events.append({"time": self.now, "kind": EventKind.SIMULATION_END.value,
                                 "ids": []})
        return self._result()

    # -- event handlers ------------------------------------------------

    def _on_arrival(self, job_id: str) -> None:
        spec = self.specs[job_id]
        map_job, red_job = split_job(spec)
        place_blocks(spec, self.cfg, self.rng(f"placement/{job_id}"), self._placement)
        locations = {i: self._placement.replicas[(job_id, i)] for i in range(spec.num_map_tasks)}
        self._add_phase(map_job, spec, locations)
        if red_job is not None:
            self._reduce_pending[job_id] = red_job
            if self._slowstart_needed(spec) == 0:
                self._activate_reduce(job_id)

    def _slowstart_needed(self, spec: JobSpec) -> int:
        return math.ceil(self.cfg.slowstart_fraction * spec.num_map_tasks - 1e-12)

    def _add_phase(self, job: PhaseJob, spec: JobSpec, locations=None) -> None:
        if job.arrival_time is None:
            job.arrival_time = self.now
        phase = Phase(job, spec, locations)
        self.phases[job.phase_id] = phase
        self.active[job.phase_id] = phase
        self._apply(self.scheduler.on_job_arrival(phase, self))

    def _activate_reduce(self, job_id: str) -> None:
        red = self._reduce_pending.pop(job_id)
        red.arrival_time = self.now
        self._add_phase(red, self.specs[job_id])

    def _on_heartbeat(self, machine_id: int, periodic: bool) -> None:
        self._apply(self.scheduler.on_heartbeat(machine_id, self))
        if periodic:
            self._push(self.now + self.cfg.heartbeat_interval, EventKind.HEARTBEAT,
                       machine_id, True)

    def _oob_heartbeat(self, machine_id: int) -> None:
        if self.cfg.out_of_band_heartbeat:
            self._push(self.now, EventKind.HEARTBEAT, machine_id, False)

    def _on_shuffle_complete(self, task_id: str, epoch: int) -> None:
        att = self.attempts[task_id]
        if att.epoch != epoch or att.state is not TaskState.RUNNING:
            return
        att.shuffle_done = att.shuffle_work
        att.accrue_since = None
        self._start_accrual(att)

    def _on_task_completion(self, task_id: str, epoch: int) -> None:
        att = self.attempts[task_id]
        if att.epoch != epoch or att.state is not TaskState.RUNNING:
            return
        att.exec_done = att.exec_work
        att.shuffle_done = att.shuffle_work
        att.accrue_since = None
        att.transition(TaskState.COMPLETED)
        att.end_time = self.now
        self._release(att)
        phase = self.phases[att.phase_id]
        phase.completed += 1
        spec = phase.spec
        if phase.completed == phase.job.num_tasks:
            phase.job.advance_state(PhaseState.COMPLETED)
            phase.job.completion_time = self.now
            del self.active[phase.phase_id]
            if phase.kind is Kind.MAP:
                self._release_barrier(spec.job_id)
            if self._job_done(spec):
                self._jobs_left -= 1
        self._apply(self.scheduler.on_task_completion(att, self))
        if (phase.kind is Kind.MAP and spec.job_id in self._reduce_pending
                and phase.completed >= self._slowstart_needed(spec)):
            self._activate_reduce(spec.job_id)
        self._oob_heartbeat(att.machine_id)

    def _on_suspend_complete(self, task_id: str) -> None:
        att = self.attempts[task_id]
        att.swapping = False
        self.phases[att.phase_id].swapping_out -= 1
        self._release(att)
        self._oob_heartbeat(att.machine_id)

    def _on_resume_complete(self, task_id: str, epoch: int) -> None:
        att = self.attempts[task_id]
        if att.epoch != epoch or att.state is not TaskState.RUNNING:
            return
        att.swapping = False
        self._start_accrual(att)

    # -- task accounting -----------------------------------------------

    def _start_accrual(self, att: TaskAttempt) -> None:
        if att.shuffle_done < att.shuffle_work:
            att.accrue_since = self.now
            self._push(self.now + max(0.0, att.shuffle_work - att.shuffle_done),
                       EventKind.SHUFFLE_COMPLETE, att.task_id, att.epoch)
        elif (att.kind is Kind.REDUCE and self.cfg.reduce_barrier
              and not self.map_phase_done(att.job_id)):
            att.accrue_since = None  # holds its slot until the last map finishes
        else:
            if att.exec_start is None:
                att.exec_start = self.now
            att.accrue_since = self.now
            self._push(self.now + max(0.0, att.exec_work - att.exec_done),
                       EventKind.TASK_COMPLETION, att.task_id, att.epoch)

    def _pause(self, att: TaskAttempt) -> None:
        att.shuffle_done, att.exec_done = att.done_at(self.now)
        att.accrue_since = None
        att.epoch += 1

    def _release_barrier(self, job_id: str) -> None:
        red = self.phases.get(f"{job_id}/reduce")
        if red is None:
            return
        for att in list(red.holding.values()):
            if (att.state is TaskState.RUNNING and not att.swapping
                    and att.accrue_since is None and att.shuffle_done >= att.shuffle_work):
                self._start_accrual(att)

    def _hold(self, att: TaskAttempt) -> None:
        self.machines[att.machine_id].holding[att.kind][att.task_id] = att
        phase = self.phases[att.phase_id]
        phase.holding[att.task_id] = att
        att.slot_since = self.now
        self._timeline.append((self.now, att.phase_id, att.kind.value, phase.running))

    def _release(self, att: TaskAttempt) -> None:
        del self.machines[att.machine_id].holding[att.kind][att.task_id]
        phase = self.phases[att.phase_id]
        del phase.holding[att.task_id]
        att.slot_time += self.now - att.slot_since
        att.slot_since = None
        self._timeline.append((self.now, att.phase_id, att.kind.value, phase.running))

    # -- actions -------------------------------------------------------

    def _apply(self, actions) -> None:
        for a in actions or ():
            if a.kind is ActionKind.LAUNCH:
                self._launch(a)
            elif a.kind is ActionKind.SUSPEND:
                self._suspend(a)
            elif a.kind is ActionKind.RESUME:
                self._resume(a)
            elif a.kind is ActionKind.KILL:
                self._kill(a)
            elif a.kind is not ActionKind.NOOP:
                raise ProtocolError(f"unknown action {a!r}")

    def _attempt_for(self, a: Action) -> TaskAttempt:
        att = self.attempts.get(a.task_id)
        if att is None:
            raise ProtocolError(f"{a.kind.value}: unknown task {a.task_id!r}")
        return att

    def _launch(self, a: Action) -> None:
        phase = self.active.get(a.phase_id)
        if phase is None:
            raise ProtocolError(f"LaunchTask: phase {a.phase_id!r} is not active")
        if a.machine_id is None or not 0 <= a.machine_id < len(self.machines):
            raise ProtocolError(f"LaunchTask: bad machine {a.machine_id!r}")
        kind = phase.kind
        if self.machines[a.machine_id].free(kind) <= 0:
            raise ProtocolError(f"LaunchTask: no free {kind.value} slot on machine {a.machine_id}")
        idx = a.task_index
        if idx is None:
            idx = phase.pending.lowest()
        if idx is None or idx not in phase.pending:
            raise ProtocolError(f"LaunchTask: task {idx!r} of {a.phase_id} is not pending")
        phase.pending.remove(idx)
        spec = phase.spec
        self._attempt_seq += 1
        if kind is Kind.MAP:
            local = a.machine_id in self._placement.replicas[(spec.job_id, idx)]
            shuffle_work = 0.0
            exec_work = effective_task_duration(spec.map_task_duration, kind, local, self.cfg)
            memory = 0.0
            self.total_maps += 1
            self.local_maps += local
        else:
            local = True
            shuffle_work = spec.shuffle_bytes_per_reduce / self.cfg.shuffle_bandwidth
            exec_work = spec.reduce_task_duration
            memory = spec.reduce_task_memory
        phase.seq += 1
        att = TaskAttempt(
            task_id=f"{phase.phase_id}#{idx}.{phase.seq}", phase_id=phase.phase_id,
            job_id=spec.job_id, kind=kind, index=idx, machine_id=a.machine_id,
            launch_time=self.now, shuffle_work=shuffle_work, exec_work=exec_work,
            is_sample=a.is_sample, is_local=local, memory_footprint=memory,
            training_slot=a.training, seq=self._attempt_seq)
        att.transition(TaskState.RUNNING)
        self.attempts[att.task_id] = att
        phase.launched_once += 1
        self._hold(att)
        self._start_accrual(att)

    def _suspend(self, a: Action) -> None:
        att = self._attempt_for(a)
        if att.state is not TaskState.RUNNING or att.swapping:
            raise ProtocolError(f"SuspendTask: {att.task_id} is not running ({att.state.value})")
        self._pause(att)
        att.transition(TaskState.SUSPENDED)
        att.suspended_at = self.now
        att.swapping = True
        self.machines[att.machine_id].suspended[att.task_id] = att
        self.phases[att.phase_id].suspended[att.task_id] = att
        self.phases[att.phase_id].swapping_out += 1
        cost = suspend_cost(att.memory_footprint, self.cost_model)
        self._push(self.now + cost, EventKind.SUSPEND_COMPLETE, att.task_id)

    def _resume(self, a: Action) -> None:
        att = self._attempt_for(a)
        if att.state is not TaskState.SUSPENDED or att.swapping:
            raise ProtocolError(f"ResumeTask: {att.task_id} is not suspended")
        machine = self.machines[att.machine_id]
        if machine.free(att.kind) <= 0:
            raise ProtocolError(f"ResumeTask: no free slot on machine {att.machine_id}")
        att.transition(TaskState.RUNNING)
        att.suspended_at = None
        del machine.suspended[att.task_id]
        del self.phases[att.phase_id].suspended[att.task_id]
        self._hold(att)
        att.swapping = True
        cost = suspend_cost(att.memory_footprint, self.cost_model)
        self._push(self.now + cost, EventKind.RESUME_COMPLETE, att.task_id, att.epoch)

    def _kill(self, a: Action) -> None:
        att = self._attempt_for(a)
        if att.state not in (TaskState.RUNNING, TaskState.SUSPENDED) or att.swapping:
            raise ProtocolError(f"KillTask: {att.task_id} cannot be killed ({att.state.value})")
        self._pause(att)
        phase = self.phases[att.phase_id]
        if att.state is TaskState.RUNNING:
            self._release(att)
        else:
            del self.machines[att.machine_id].suspended[att.task_id]
            del phase.suspended[att.task_id]
        att.transition(TaskState.KILLED)
        att.end_time = self.now
        phase.pending.add(att.index)

    # -- bookkeeping ---------------------------------------------------

    def _check(self) -> None:
        for m in self.machines:
            for kind in (Kind.MAP, Kind.REDUCE):
                if len(m.holding[kind]) > m.capacity[kind]:
                    raise AssertionError(f"slot overflow on machine {m.machine_id}")
        for att in self.attempts.values():
            if att.state is TaskState.SUSPENDED and att.accrue_since is not None:
                raise AssertionError(f"{att.task_id} accrues while suspended")

    def _result(self) -> SimulationResult:
        jobs = []
        unfinished = []
        for spec in sorted(self.specs.values(), key=lambda s: (s.submit_time, s.job_id)):
            mp = self.phases.get(f"{spec.job_id}/map")
            rp = self.phases.get(f"{spec.job_id}/reduce")
            map_done = mp.job.completion_time if mp else None
            red_arr = rp.job.arrival_time if rp else None
            red_done = rp.job.completion_time if rp else None
            completion = None
            if self._job_done(spec):
                completion = max(map_done, red_done) if spec.num_reduce_tasks else map_done
            if completion is None:
                unfinished.append(spec.job_id)
            jobs.append({
                "job_id": spec.job_id, "submit_time": spec.submit_time,
                "label": spec.job_class_label,
                "num_map_tasks": spec.num_map_tasks, "num_reduce_tasks": spec.num_reduce_tasks,
                "map_completion": map_done, "reduce_arrival": red_arr,
                "reduce_completion": red_done, "completion": completion,
            })
        phases = []
        for p in self.phases.values():
            phases.append({
                "phase_id": p.phase_id, "job_id": p.spec.job_id, "kind": p.kind.value,
                "num_tasks": p.job.num_tasks, "arrival": p.job.arrival_time,
                "completion": p.job.completion_time,
            })
        attempts = []
        for att in self.attempts.values():
            slot_time = att.slot_time
            if att.slot_since is not None:
                slot_time += self.now - att.slot_since
            attempts.append({
                "task_id": att.task_id, "phase_id": att.phase_id, "job_id": att.job_id,
                "kind": att.kind.value, "index": att.index, "machine_id": att.machine_id,
                "launch_time": att.launch_time, "end_time": att.end_time,
                "state": att.state.value, "is_local": att.is_local, "is_sample": att.is_sample,
                "slot_time": slot_time, "work": att.work,
            })
        describe = getattr(self.scheduler, "describe", None)
        return SimulationResult(
            scheduler=getattr(self.scheduler, "name", type(self.scheduler).__name__),
            seed=self.seed, cluster=self.cfg.to_dict(),
            scheduler_config=describe() if describe else {},
            jobs=jobs, phases=phases, attempts=attempts, timeline=self._timeline,
            local_maps=self.local_maps, total_maps=self.total_maps, end_time=self.now,
            unfinished=unfinished, event_log=self._events if self.record_events else None,
            decisions=self.decisions)


def run_simulation(trace, cluster_cfg: ClusterConfig, scheduler, seed: int = 0,
                   **kwargs) -> SimulationResult:
    return Simulator(trace, cluster_cfg, scheduler, seed, **kwargs).run()


def write_event_log(result: SimulationResult, path) -> None:
    """Newline-delimited JSON, one record per processed event."""
    with open(path, "w", encoding="utf-8") as f:
        for rec in result.event_log or ():
            f.write(json.dumps(rec, sort_keys=True) + "\n")
