"""FIFO and FAIR schedulers, and the delay-scheduling helper shared with HFSP."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .core import Kind
from .engine import NOOP, Action, launch


class Scheduler:
    """Callback contract used by the simulator.

    Each callback returns an iterable of actions.  The simulator applies
    each action as soon as it is produced, so a generator callback sees the
    effect of its earlier actions (slots taken, tasks launched).
    """

    name = "base"

    def on_job_arrival(self, phase, sim) -> list[Action]:
        return []

    def on_heartbeat(self, machine_id: int, sim) -> list[Action]:
        return []

    def on_task_completion(self, attempt, sim) -> list[Action]:
        return []

    def describe(self) -> dict:
        return {"name": self.name}


class DelayDecision(str, enum.Enum):
    LAUNCH_LOCAL = "LaunchLocal"
    SKIP = "Skip"
    LAUNCH_NON_LOCAL = "LaunchNonLocal"


@dataclass
class DelayState:
    max_skips: int = 2
    counters: dict[str, int] = field(default_factory=dict)

    def forget(self, phase_id: str) -> None:
        self.counters.pop(phase_id, None)


def delay_decide(state: DelayState, phase, machine_id: int) -> tuple[DelayDecision, int | None]:
    """Decide what ``phase`` does with a map slot offered on ``machine_id``.

    Counters count declined offers per phase-job.
    """
    idx = phase.pending.lowest_local(machine_id)
    if idx is not None:
        state.counters[phase.phase_id] = 0
        return DelayDecision.LAUNCH_LOCAL, idx
    skipped = state.counters.get(phase.phase_id, 0)
    if skipped < state.max_skips:
        state.counters[phase.phase_id] = skipped + 1
        return DelayDecision.SKIP, None
    state.counters[phase.phase_id] = 0
    return DelayDecision.LAUNCH_NON_LOCAL, phase.pending.lowest()


def _submit_key(phase):
    return (phase.spec.submit_time, phase.job.arrival_time, phase.phase_id)


def fifo_select(pending_jobs, machine_id: int, kind: Kind) -> Action:
    """First job in submission order with a pending task of ``kind``.

    Within the chosen job a data-local map task is preferred; there is no
    waiting across jobs.
    """
    for phase in sorted(pending_jobs, key=lambda p: (-getattr(p.spec, "priority", 0),) + _submit_key(p)):
        if phase.kind is not kind or not len(phase.pending):
            continue
        idx = None
        if kind is Kind.MAP:
            idx = phase.pending.lowest_local(machine_id)
        if idx is None:
            idx = phase.pending.lowest()
        return launch(phase.phase_id, machine_id, idx)
    return NOOP


class FifoScheduler(Scheduler):
    name = "fifo"

    def on_heartbeat(self, machine_id, sim):
        for kind in (Kind.MAP, Kind.REDUCE):
            jobs = sim.active_phases(kind)
            for _ in range(sim.free_slots(machine_id, kind)):
                a = fifo_select(jobs, machine_id, kind)
                if a is NOOP:
                    break
                yield a


@dataclass
class FairShareState:
    capacity: int
    min_share: float = 0.0
    deficits: dict[str, float] = field(default_factory=dict)
    running: dict[str, int] = field(default_factory=dict)
    last_update: float = 0.0


def update_deficits(state: FairShareState, dt: float, active_jobs) -> None:
    """Accumulate slot-seconds owed to each job over the last ``dt`` seconds.

    ``active_jobs`` maps phase id to the number of slots it held during the
    interval.  The share is the slot-time actually handed out, split evenly,
    so deficits always sum to zero.
    """
    if dt < 0:
        raise ValueError("dt must be >= 0")
    for pid in list(state.deficits):
        if pid not in active_jobs:
            leftover = state.deficits.pop(pid)
            state.running.pop(pid, None)
            if state.deficits and leftover:
                share = leftover / len(state.deficits)
                for other in state.deficits:
                    state.deficits[other] += share
    for pid in active_jobs:
        state.deficits.setdefault(pid, 0.0)
    if not active_jobs:
        return
    used = sum(active_jobs.values())
    fair = used / len(active_jobs)
    if dt:
        for pid, held in active_jobs.items():
            state.deficits[pid] += (fair - held) * dt
    state.running = dict(active_jobs)


def fair_select(state: FairShareState, jobs, machine_id: int, kind: Kind,
                delay: DelayState | None = None, skipped: set | None = None) -> Action:
    """Next launch for a free slot on ``machine_id``.

    ``skipped`` collects phases that declined this machine during the
    current heartbeat; they are not offered its remaining slots.
    """
    candidates = [p for p in jobs if p.kind is kind and len(p.pending)]
    if not candidates:
        return NOOP
    starved = [p for p in candidates if p.running < state.min_share]
    if starved:
        order = sorted(starved, key=_submit_key)
    else:
        order = sorted(candidates,
                       key=lambda p: (-state.deficits.get(p.phase_id, 0.0),) + _submit_key(p))
    for phase in order:
        if kind is Kind.MAP and delay is not None:
            if skipped is not None and phase.phase_id in skipped:
                continue
            decision, idx = delay_decide(delay, phase, machine_id)
            if decision is DelayDecision.SKIP:
                if skipped is not None:
                    skipped.add(phase.phase_id)
                continue
        else:
            idx = phase.pending.lowest()
        return launch(phase.phase_id, machine_id, idx)
    return NOOP


class FairScheduler(Scheduler):
    """Single-pool fair scheduler with deficit ordering and delay scheduling."""

    name = "fair"

    def __init__(self, max_skips: int = 2, min_share: float = 0.0, delay: bool = True):
        self.max_skips = max_skips
        self.min_share = min_share
        self.use_delay = delay
        self.delay = DelayState(max_skips)
        self.states: dict[Kind, FairShareState] = {}

    def describe(self):
        return {"name": self.name, "max_skips": self.max_skips, "min_share": self.min_share,
                "delay_scheduling": self.use_delay, "pools": 1, "preemption": "none"}

    def _update(self, sim) -> None:
        for kind in (Kind.MAP, Kind.REDUCE):
            st = self.states.get(kind)
            if st is None:
                st = self.states[kind] = FairShareState(sim.cfg.slots(kind), self.min_share,
                                                        last_update=sim.now)
            # integrate with the allocation that held since the last call
            held = {pid: n for pid, n in st.running.items() if pid in sim.active}
            update_deficits(st, sim.now - st.last_update, held)
            st.last_update = sim.now
            st.running = {p.phase_id: p.running for p in sim.active_phases(kind)
                          if p.running or len(p.pending)}
            for pid in st.running:
                st.deficits.setdefault(pid, 0.0)

    def on_job_arrival(self, phase, sim):
        self._update(sim)
        return []

    def on_task_completion(self, attempt, sim):
        self._update(sim)
        if attempt.phase_id not in sim.active:
            self.delay.forget(attempt.phase_id)
        return []

    def on_heartbeat(self, machine_id, sim):
        self._update(sim)
        for kind in (Kind.MAP, Kind.REDUCE):
            st = self.states[kind]
            jobs = sim.active_phases(kind)
            skipped = set()
            for _ in range(sim.free_slots(machine_id, kind)):
                a = fair_select(st, jobs, machine_id, kind, self.delay if self.use_delay else None,
                                skipped)
                if a is NOOP:
                    break
                yield a
                st.running[a.phase_id] = sim.phase(a.phase_id).running
