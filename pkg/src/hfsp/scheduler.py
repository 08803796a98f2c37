"""The HFSP scheduling policy.

Map and reduce phases are ranked separately by their projected completion
time in a processor-sharing virtual cluster, and real slots are handed out
in rank order, each phase taking up to its residual task demand.  Phases
that hold more slots than their rank entitles them to give them back by
waiting (maps), or by suspending or killing their newest reduce tasks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .baselines import DelayDecision, DelayState, Scheduler, delay_decide
from .core import Kind, PhaseState, TaskState, ValidationError
from .engine import ProtocolError, kill, launch, resume, suspend
from .estimator import (AverageTaskSizeState, EstimatorConfig, Provenance, SampleRecord,
                        SizeEstimate, fit_phase_size, fit_reduce_size, initial_estimate,
                        inject_error, progress_based_size, update_average_task_size)
from .virtual_cluster import VirtualCluster

PREEMPTION_MODES = ("eager", "wait", "kill")


@dataclass
class HfspConfig:
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    training_map_slots: int | None = None  # None: 10% of the map slots, at least 1
    training_reduce_slots: int | None = None
    max_suspended_tasks: int = 100
    map_preemption: str = "wait"
    reduce_preemption: str = "eager"
    max_skips: int = 2
    delay_scheduling: bool = True
    size_oracle: bool = False
    integral_virtual_slots: bool = False

    def validate(self) -> None:
        self.estimator.validate()
        if self.map_preemption != "wait":
            raise ValidationError("map tasks are only preempted by waiting")
        if self.reduce_preemption not in PREEMPTION_MODES:
            raise ValidationError(f"reduce_preemption must be one of {PREEMPTION_MODES}")
        if self.max_suspended_tasks < 0:
            raise ValidationError("max_suspended_tasks must be >= 0")
        if self.max_skips < 0:
            raise ValidationError("max_skips must be >= 0")
        for name in ("training_map_slots", "training_reduce_slots"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValidationError(f"{name} must be >= 0")

    def training_slots(self, kind: Kind, total: int) -> int:
        v = self.training_map_slots if kind is Kind.MAP else self.training_reduce_slots
        if v is None:
            v = min(max(1, int(0.1 * total)), total - 1)
        if v >= total and total > 0:
            raise ValidationError(f"training {kind.value} slots must be < {total}")
        return v

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["estimator"] = self.estimator.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "HfspConfig":
        d = dict(d)
        est = EstimatorConfig(**d.pop("estimator", {}))
        return cls(estimator=est, **d)


@dataclass
class PhaseInfo:
    phase_id: str
    kind: Kind
    num_tasks: int
    n_samples: int
    estimate: SizeEstimate
    believed: SizeEstimate
    samples: dict = field(default_factory=dict)
    sample_indices: set = field(default_factory=set)  # the first n_samples tasks launched

    def wants_samples(self) -> bool:
        return len(self.sample_indices) < self.n_samples

    def mark(self, idx: int) -> bool:
        """Whether task ``idx`` runs as a sample, claiming a sample place if free."""
        if idx not in self.sample_indices and self.wants_samples():
            self.sample_indices.add(idx)
        return idx in self.sample_indices


def true_size(phase, cfg) -> float:
    spec = phase.spec
    if phase.kind is Kind.MAP:
        return spec.num_map_tasks * spec.map_task_duration
    shuffle = spec.shuffle_bytes_per_reduce / cfg.shuffle_bandwidth
    return spec.num_reduce_tasks * (shuffle + spec.reduce_task_duration)


class HfspScheduler(Scheduler):
    name = "hfsp"

    def __init__(self, config: HfspConfig | None = None, log_ranks: bool = False):
        self.config = config or HfspConfig()
        self.config.validate()
        est = self.config.estimator
        self.avg = AverageTaskSizeState({Kind.MAP: est.bootstrap_map,
                                         Kind.REDUCE: est.bootstrap_reduce})
        self.delay = DelayState(self.config.max_skips)
        self.info: dict[str, PhaseInfo] = {}
        self.vcs: dict[Kind, VirtualCluster] = {}
        self.ranks: dict[Kind, list[str]] = {Kind.MAP: [], Kind.REDUCE: []}
        self.training_cap: dict[Kind, int] = {}
        self.training_running = {Kind.MAP: 0, Kind.REDUCE: 0}
        self.log_ranks = log_ranks
        self._rng = None
        self._sim = None

    def describe(self):
        d = self.config.to_dict()
        d["name"] = self.name
        d["training_slots"] = {k.value: v for k, v in self.training_cap.items()}
        return d

    # -- setup -----------------------------------------------------------

    def _bind(self, sim) -> None:
        if self._sim is sim:
            return
        if self._sim is not None:
            raise RuntimeError("an HfspScheduler instance drives a single simulation")
        self._sim = sim
        self._rng = sim.rng("hfsp/estimation-error")
        for kind in (Kind.MAP, Kind.REDUCE):
            total = sim.cfg.slots(kind)
            self.vcs[kind] = VirtualCluster(total, self.config.integral_virtual_slots, sim.now)
            self.training_cap[kind] = self.config.training_slots(kind, total)

    def _age(self, now: float) -> None:
        for vc in self.vcs.values():
            vc.age(now)

    def _believe(self, est: SizeEstimate) -> SizeEstimate:
        return inject_error(est, self.config.estimator.alpha, self._rng)

    # -- callbacks -------------------------------------------------------

    def on_job_arrival(self, phase, sim):
        self._bind(sim)
        pid = phase.phase_id
        if pid in self.info:
            raise ProtocolError(f"duplicate arrival of {pid}")
        self._age(sim.now)
        k = phase.job.num_tasks
        est_cfg = self.config.estimator
        if self.config.size_oracle:
            size = true_size(phase, sim.cfg)
            est = SizeEstimate(pid, size, Provenance.TRAINED, size / k, k)
            phase.job.advance_state(PhaseState.ESTIMATED)
        else:
            est = initial_estimate(phase.kind, k, self.avg, est_cfg, pid)
        believed = self._believe(est)
        info = PhaseInfo(pid, phase.kind, k, min(est_cfg.s, k), est, believed)
        self.info[pid] = info
        self.vcs[phase.kind].add(pid, believed.serialized_size, k, phase.job.weight,
                                 phase.job.arrival_time, infinite=believed.infinite)
        sim.log_decision(event="estimate", phase_id=pid, provenance=est.provenance.value,
                         size=est.serialized_size, believed=believed.serialized_size,
                         samples=info.n_samples)
        self._rerank(phase.kind, sim)
        return self._preempt(phase.kind, sim)

    def on_task_completion(self, attempt, sim):
        self._bind(sim)
        info = self.info.get(attempt.phase_id)
        if info is None:
            raise ProtocolError(f"completion of unknown task {attempt.task_id}")
        self._age(sim.now)
        if attempt.training_slot:
            self.training_running[attempt.kind] -= 1
        update_average_task_size(self.avg, attempt.work, attempt.kind)
        phase = sim.phase(attempt.phase_id)
        if attempt.is_sample and attempt.index not in info.samples:
            if attempt.kind is Kind.MAP:
                rec = SampleRecord(attempt.task_id, attempt.exec_done)
            else:
                rec = SampleRecord(attempt.task_id, attempt.exec_done,
                                   shuffle_time=attempt.exec_start - attempt.launch_time,
                                   input_bytes=phase.spec.shuffle_bytes_per_reduce)
            self._record_sample(info, attempt.index, rec, sim)
        vc = self.vcs[attempt.kind]
        if attempt.phase_id not in sim.active:
            vc.remove(attempt.phase_id)
            self.delay.forget(attempt.phase_id)
            del self.info[attempt.phase_id]
        else:
            vc.set_demand(attempt.phase_id, phase.residual)
        self._rerank(attempt.kind, sim)
        return self._preempt(attempt.kind, sim)

    def on_heartbeat(self, machine_id, sim):
        self._bind(sim)
        self._check_reduce_timeouts(sim)
        for kind in (Kind.MAP, Kind.REDUCE):
            if sim.free_slots(machine_id, kind) <= 0:
                continue
            entitled = self.entitlements(kind, sim)
            skipped = set()  # a phase declines a machine once per heartbeat
            while sim.free_slots(machine_id, kind) > 0:
                action = self._pick(kind, machine_id, entitled, skipped, sim)
                if action is None:
                    break
                yield action
        yield from self._preempt(Kind.REDUCE, sim)

    # -- estimation ------------------------------------------------------

    def _record_sample(self, info: PhaseInfo, index: int, rec: SampleRecord, sim) -> None:
        info.samples[index] = rec
        sim.log_decision(event="sample", phase_id=info.phase_id, task_id=rec.task_id,
                         execution_time=rec.execution_time, shuffle_time=rec.shuffle_time,
                         extrapolated=rec.extrapolated)
        phase = sim.phase(info.phase_id)
        if phase.job.state is not PhaseState.TRAINING or len(info.samples) < info.n_samples:
            return
        dist = self.config.estimator.fit_distribution
        recs = list(info.samples.values())
        if info.kind is Kind.MAP:
            est = fit_phase_size(recs, info.num_tasks, dist, info.phase_id)
        else:
            est = fit_reduce_size(recs, info.num_tasks, dist, info.phase_id)
        info.estimate = est
        info.believed = self._believe(est)
        phase.job.advance_state(PhaseState.ESTIMATED)
        if info.phase_id in sim.active:
            self._age(sim.now)
            self.vcs[info.kind].set_size(info.phase_id, info.believed.serialized_size)
        sim.log_decision(event="estimate", phase_id=info.phase_id, provenance="trained",
                         size=est.serialized_size, believed=info.believed.serialized_size,
                         samples=len(recs))

    def _check_reduce_timeouts(self, sim) -> None:
        delta = self.config.estimator.delta
        changed = False
        for pid in self.ranks[Kind.REDUCE]:
            phase = sim.active.get(pid)
            info = self.info.get(pid)
            if phase is None or info is None or phase.job.state is not PhaseState.TRAINING:
                continue
            for att in list(phase.holding.values()):
                if (not att.is_sample or att.index in info.samples or att.exec_start is None
                        or att.state is not TaskState.RUNNING):
                    continue
                elapsed = att.exec_elapsed(sim.now)
                if elapsed < delta:
                    continue
                # heartbeats land on or after the timeout; with linear progress
                # elapsed / p(elapsed) equals delta / p(delta)
                sigma = progress_based_size(elapsed, att.exec_progress(sim.now))
                if sigma is None:
                    sim.log_decision(event="sample_pending", task_id=att.task_id)
                    continue
                rec = SampleRecord(att.task_id, sigma,
                                   shuffle_time=att.exec_start - att.launch_time,
                                   input_bytes=phase.spec.shuffle_bytes_per_reduce,
                                   extrapolated=True)
                self._record_sample(info, att.index, rec, sim)
                changed = True
        if changed:
            self._rerank(Kind.REDUCE, sim)

    # -- ranking and allocation -----------------------------------------

    def _rerank(self, kind: Kind, sim) -> None:
        self.ranks[kind] = [pid for pid, _ in self.vcs[kind].project()]
        if self.log_ranks:
            sim.log_decision(event="rank", kind=kind.value, order=list(self.ranks[kind]))

    def entitlements(self, kind: Kind, sim) -> dict[str, int]:
        """Slots owed to each phase when capacity is granted in rank order."""
        left = sim.cfg.slots(kind)
        out = {}
        for pid in self.ranks[kind]:
            phase = sim.active.get(pid)
            if phase is None:
                continue
            e = min(phase.residual, left)
            out[pid] = e
            left -= e
        return out

    def _pick(self, kind: Kind, m: int, entitled: dict, skipped: set, sim):
        act = self._pick_training(kind, m, skipped, sim)
        if act is not None:
            return act
        if kind is Kind.REDUCE:
            act = self._pick_resume(m, entitled, sim)
            if act is not None:
                return act
        fallback = []
        for pid in self.ranks[kind]:
            phase = sim.active.get(pid)
            if phase is None or not len(phase.pending):
                continue
            if phase.active_slots >= entitled.get(pid, 0):
                fallback.append(phase)
                continue
            act = self._launch_regular(phase, m, skipped)
            if act is not None:
                return act
        # leftover capacity nobody entitled can use here flows down the ranking
        for phase in fallback:
            act = self._launch_regular(phase, m, skipped)
            if act is not None:
                return act
        return None

    def _choose_task(self, phase, m: int, skipped: set):
        if phase.kind is Kind.MAP and self.config.delay_scheduling:
            if phase.phase_id in skipped:
                return None
            decision, idx = delay_decide(self.delay, phase, m)
            if decision is DelayDecision.SKIP:
                skipped.add(phase.phase_id)
                return None
        elif phase.kind is Kind.MAP:
            idx = phase.pending.lowest_local(m)
            if idx is None:
                idx = phase.pending.lowest()
        else:
            idx = phase.pending.lowest()
        return idx

    def _launch_regular(self, phase, m: int, skipped: set):
        idx = self._choose_task(phase, m, skipped)
        if idx is None:
            return None
        return launch(phase.phase_id, m, idx, is_sample=self.info[phase.phase_id].mark(idx))

    def _pick_training(self, kind: Kind, m: int, skipped: set, sim):
        if self.training_running[kind] >= self.training_cap[kind]:
            return None
        for pid in self.ranks[kind]:
            phase = sim.active.get(pid)
            info = self.info.get(pid)
            if (phase is None or phase.job.state is not PhaseState.TRAINING
                    or not info.wants_samples() or not len(phase.pending)):
                continue
            idx = self._choose_task(phase, m, skipped)
            if idx is None:
                continue
            info.mark(idx)
            self.training_running[kind] += 1
            return launch(pid, m, idx, is_sample=True, training=True)
        return None

    def _pick_resume(self, m: int, entitled: dict, sim):
        best = None
        for att in sim.machines[m].suspended.values():
            if att.swapping:
                continue
            phase = sim.active.get(att.phase_id)
            if phase is None or phase.active_slots >= entitled.get(att.phase_id, 0):
                continue
            if best is None or (att.launch_time, att.seq) < (best.launch_time, best.seq):
                best = att
        return resume(best) if best is not None else None

    # -- preemption ------------------------------------------------------

    def _preempt(self, kind: Kind, sim):
        mode = self.config.reduce_preemption if kind is Kind.REDUCE else self.config.map_preemption
        if mode == "wait":
            return []
        entitled = self.entitlements(kind, sim)
        need = 0
        phases = [sim.active[pid] for pid in self.ranks[kind] if pid in sim.active]
        for phase in phases:
            short = entitled.get(phase.phase_id, 0) - phase.active_slots
            if short > 0:
                need += min(short, len(phase.pending))
        # tasks whose completion is due at this instant free their slots anyway
        finishing = [a for p in phases for a in p.holding.values()
                     if a.state is TaskState.RUNNING and not a.swapping
                     and a.progress(sim.now) >= 1 - 1e-12]
        incoming = sum(p.swapping_out for p in phases) + len(finishing)
        to_free = need - sim.total_free(kind) - incoming
        if to_free <= 0:
            return []
        actions = []
        suspended = sim.suspended_count()
        for phase in reversed(phases):
            excess = phase.active_slots - entitled.get(phase.phase_id, 0)
            if excess <= 0:
                continue
            victims = [a for a in phase.holding.values()
                       if a.state is TaskState.RUNNING and not a.swapping and not a.training_slot
                       and a not in finishing]
            # newest first
            victims.sort(key=lambda a: (a.launch_time, a.seq), reverse=True)
            for att in victims[:min(excess, to_free)]:
                if mode == "eager":
                    if suspended >= self.config.max_suspended_tasks:
                        return actions
                    suspended += 1
                    actions.append(suspend(att))
                else:
                    actions.append(kill(att))
                sim.log_decision(event=f"preempt_{mode}", task_id=att.task_id,
                                 phase_id=phase.phase_id)
                to_free -= 1
            if to_free <= 0:
                break
        return actions
