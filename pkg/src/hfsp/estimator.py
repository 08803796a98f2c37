"""Online job-size estimation.

Sizes are *serialized*: the sum of the run times of a phase's tasks, in
task-seconds, independent of how many slots the cluster has.
"""

from __future__ import annotations

import enum
import logging
import math
import random
from dataclasses import dataclass, field

from .core import Kind, ValidationError

log = logging.getLogger(__name__)


class Provenance(str, enum.Enum):
    INITIAL = "initial"
    TRAINED = "trained"


@dataclass
class EstimatorConfig:
    s: int = 5
    xi: float = 1.0
    delta: float = 60.0
    fit_distribution: str = "uniform"
    alpha: float = 0.0
    bootstrap_map: float = 60.0
    bootstrap_reduce: float = 60.0

    def validate(self) -> None:
        if self.s < 1:
            raise ValidationError("s must be >= 1")
        if not self.xi >= 1:
            raise ValidationError("xi must be in [1, inf]")
        if not self.delta > 0:
            raise ValidationError("delta must be > 0")
        if not 0 <= self.alpha <= 1:
            raise ValidationError("alpha must be in [0, 1]")
        if self.fit_distribution not in FITTERS:
            raise ValidationError(f"unknown fit distribution {self.fit_distribution!r}")
        if self.bootstrap_map <= 0 or self.bootstrap_reduce <= 0:
            raise ValidationError("bootstrap task sizes must be > 0")

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class SampleRecord:
    task_id: str
    execution_time: float
    shuffle_time: float = 0.0
    input_bytes: float = 0.0
    extrapolated: bool = False

    def __post_init__(self):
        if not self.execution_time > 0:
            raise ValidationError(f"{self.task_id}: execution_time must be > 0")
        if self.shuffle_time < 0:
            raise ValidationError(f"{self.task_id}: shuffle_time must be >= 0")


@dataclass
class SizeEstimate:
    phase_id: str | None
    serialized_size: float
    provenance: Provenance
    per_task_expected: float
    num_tasks: int = 1
    shuffle_size: float = 0.0
    infinite: bool = False

    def scaled(self, factor: float) -> "SizeEstimate":
        return SizeEstimate(self.phase_id, self.serialized_size * factor, self.provenance,
                            self.per_task_expected * factor, self.num_tasks,
                            self.shuffle_size * factor, self.infinite)


@dataclass
class AverageTaskSizeState:
    """Running mean of completed task durations, one per task kind."""

    bootstrap: dict = field(default_factory=lambda: {Kind.MAP: 60.0, Kind.REDUCE: 60.0})
    means: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)

    def average(self, kind: Kind) -> float:
        if self.counts.get(kind, 0) == 0:
            return self.bootstrap[kind]
        return self.means[kind]


def update_average_task_size(state: AverageTaskSizeState, duration: float, kind: Kind) -> None:
    if not duration > 0:
        raise ValidationError("task duration must be > 0")
    n = state.counts.get(kind, 0) + 1
    mean = state.means.get(kind, 0.0)
    state.means[kind] = mean + (duration - mean) / n
    state.counts[kind] = n


def initial_estimate(kind: Kind, k: int, state: AverageTaskSizeState, cfg: EstimatorConfig,
                     phase_id: str | None = None) -> SizeEstimate:
    """``xi * k * l`` where ``l`` is the current average task size of ``kind``."""
    if k < 1:
        raise ValidationError("k must be >= 1")
    l = state.average(kind)
    if math.isinf(cfg.xi):
        # rank after every estimated job; size itself is never used
        return SizeEstimate(phase_id, math.inf, Provenance.INITIAL, l, k, infinite=True)
    return SizeEstimate(phase_id, cfg.xi * k * l, Provenance.INITIAL, cfg.xi * l, k)


def fit_uniform(values) -> tuple[float, float]:
    """Least-squares fit of Uniform[a, b] to the empirical CDF of ``values``.

    Sorted values are regressed on the ECDF plotting positions
    ``(i - 0.5) / n``; the fitted line ``x = a + (b - a) q`` gives (a, b).
    """
    xs = sorted(values)
    n = len(xs)
    if n == 0:
        raise ValidationError("cannot fit an empty sample")
    if n == 1:
        return xs[0], xs[0]
    qs = [(i + 0.5) / n for i in range(n)]
    qm = 0.5
    xm = math.fsum(xs) / n
    sqq = math.fsum((q - qm) ** 2 for q in qs)
    sqx = math.fsum((q - qm) * (x - xm) for q, x in zip(qs, xs))
    slope = sqx / sqq
    a = xm - slope * qm
    return a, a + slope


FITTERS = {"uniform": fit_uniform}


def fit_phase_size(samples, k: int, distribution: str = "uniform",
                   phase_id: str | None = None) -> SizeEstimate:
    """``k`` times the mean of the distribution fitted to the sample run times."""
    samples = list(samples)
    if not samples:
        raise ValidationError("fit_phase_size needs at least one sample")
    a, b = FITTERS[distribution]([s.execution_time for s in samples])
    per_task = max((a + b) / 2.0, 1e-9)
    return SizeEstimate(phase_id, k * per_task, Provenance.TRAINED, per_task, k)


def estimate_shuffle(samples, k_reduce: int, warnings: list | None = None) -> float:
    """Total shuffle time of a reduce phase.

    ``k_reduce`` times the mean sample shuffle time weighted by each sample's
    input size.
    """
    samples = list(samples)
    if not samples:
        raise ValidationError("estimate_shuffle needs at least one sample")
    total_bytes = math.fsum(s.input_bytes for s in samples)
    if total_bytes <= 0:
        msg = "all sample input sizes are zero; using the unweighted shuffle mean"
        log.warning(msg)
        if warnings is not None:
            warnings.append(msg)
        return k_reduce * math.fsum(s.shuffle_time for s in samples) / len(samples)
    weighted = math.fsum(s.shuffle_time * s.input_bytes for s in samples)
    return k_reduce * weighted / total_bytes


def fit_reduce_size(samples, k: int, distribution: str = "uniform",
                    phase_id: str | None = None) -> SizeEstimate:
    est = fit_phase_size(samples, k, distribution, phase_id)
    est.shuffle_size = estimate_shuffle(samples, k)
    est.serialized_size += est.shuffle_size
    return est


def progress_based_size(delta: float, p: float) -> float | None:
    """Extrapolated run time of a task that reached progress ``p`` after ``delta`` s.

    Returns None when nothing has been processed yet.
    """
    if p == 0:
        return None
    if not 0 < p <= 1:
        raise ValidationError("progress must be in (0, 1]")
    return delta / p


def inject_error(estimate: SizeEstimate, alpha: float, rng: random.Random) -> SizeEstimate:
    """Multiply the size by a draw from Uniform[1 - alpha, 1 + alpha]."""
    if not 0 <= alpha <= 1:
        raise ValidationError("alpha must be in [0, 1]")
    if alpha == 0 or estimate.infinite:
        return estimate
    return estimate.scaled(rng.uniform(1 - alpha, 1 + alpha))
