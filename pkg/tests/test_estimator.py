import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hfsp.core import Kind, ValidationError
from hfsp.estimator import (AverageTaskSizeState, EstimatorConfig, Provenance, SampleRecord,
                            SizeEstimate, estimate_shuffle, fit_phase_size, fit_reduce_size,
                            fit_uniform, initial_estimate, inject_error, progress_based_size,
                            update_average_task_size)

import oracles

REL = 1e-9

FIT_EXAMPLES = [
    [10.0, 20.0],
    [5.0, 5.0, 5.0],
    [12.0, 30.0, 18.0, 25.0, 21.0],
    [1.5, 100.0, 47.25, 3.0, 60.0, 2.0, 77.7],
    [400.0, 410.0, 405.0, 395.0, 402.0],
]


@pytest.mark.parametrize("values", FIT_EXAMPLES)
def test_uniform_fit_matches_grid_search(values):
    a, b = fit_uniform(values)
    ga, gb = oracles.ls_uniform_grid(values)
    assert a == pytest.approx(ga, rel=REL, abs=REL)
    assert b == pytest.approx(gb, rel=REL, abs=REL)


def test_uniform_fit_recovers_evenly_spaced_quantiles():
    # values exactly on the uniform quantiles give the bounds back
    a, b = 10.0, 50.0
    n = 8
    xs = [a + (b - a) * (i + 0.5) / n for i in range(n)]
    fa, fb = fit_uniform(xs)
    assert (fa, fb) == (pytest.approx(a, rel=REL), pytest.approx(b, rel=REL))


def test_single_sample_fit_is_degenerate():
    assert fit_uniform([7.0]) == (7.0, 7.0)


def test_fit_phase_size_is_k_times_fitted_mean():
    samples = [SampleRecord(f"t{i}", v) for i, v in enumerate([12.0, 30.0, 18.0, 25.0, 21.0])]
    est = fit_phase_size(samples, 40)
    a, b = oracles.ls_uniform_grid([s.execution_time for s in samples])
    assert est.serialized_size == pytest.approx(40 * (a + b) / 2, rel=REL)
    assert est.provenance is Provenance.TRAINED


XI_EXAMPLES = [(1.0, 1, [], 60.0), (1.0, 10, [30.0], 60.0), (2.5, 7, [10.0, 20.0, 45.0], 60.0),
               (1.0, 1500, [33.3, 17.1, 80.0, 12.0], 60.0)]


@pytest.mark.parametrize("xi,k,durations,bootstrap", XI_EXAMPLES)
def test_initial_estimate_matches_xi_k_l(xi, k, durations, bootstrap):
    state = AverageTaskSizeState(bootstrap={Kind.MAP: bootstrap, Kind.REDUCE: bootstrap})
    for d in durations:
        update_average_task_size(state, d, Kind.MAP)
    est = initial_estimate(Kind.MAP, k, state, EstimatorConfig(xi=xi))
    assert est.serialized_size == pytest.approx(oracles.xi_k_l(xi, k, durations, bootstrap), rel=REL)
    assert est.provenance is Provenance.INITIAL


def test_infinite_xi_marks_estimate_infinite():
    est = initial_estimate(Kind.MAP, 3, AverageTaskSizeState(), EstimatorConfig(xi=math.inf))
    assert est.infinite


def test_average_is_kept_per_kind():
    state = AverageTaskSizeState()
    update_average_task_size(state, 10.0, Kind.MAP)
    assert state.average(Kind.REDUCE) == 60.0
    assert state.average(Kind.MAP) == 10.0


SHUFFLE_EXAMPLES = [
    ([(4.0, 1), (8.0, 3)], 10),
    ([(2.0, 5), (2.0, 7), (9.0, 1)], 3),
    ([(30.5, 12), (10.25, 4), (0.0, 9), (7.0, 2)], 50),
]


@pytest.mark.parametrize("samples,k", SHUFFLE_EXAMPLES)
def test_weighted_shuffle_matches_replication(samples, k):
    recs = [SampleRecord(f"t{i}", 1.0, t, b) for i, (t, b) in enumerate(samples)]
    want = oracles.weighted_shuffle_by_replication(samples, k)
    assert estimate_shuffle(recs, k) == pytest.approx(want, rel=REL)


def test_zero_input_bytes_falls_back_to_plain_mean_with_warning():
    warnings = []
    recs = [SampleRecord("a", 1.0, 4.0, 0), SampleRecord("b", 1.0, 8.0, 0)]
    assert estimate_shuffle(recs, 2, warnings) == pytest.approx(12.0)
    assert warnings


def test_reduce_size_adds_shuffle_to_execution():
    recs = [SampleRecord("a", 10.0, 4.0, 1), SampleRecord("b", 20.0, 8.0, 1)]
    est = fit_reduce_size(recs, 4)
    assert est.shuffle_size == pytest.approx(24.0)
    assert est.serialized_size == pytest.approx(4 * 15.0 + 24.0)


@pytest.mark.parametrize("delta,p", [(60.0, 0.5), (60.0, 0.1), (60.0, 1.0), (13.7, 0.0371)])
def test_progress_extrapolation_matches_bisection(delta, p):
    assert progress_based_size(delta, p) == pytest.approx(
        oracles.extrapolate_by_bisection(delta, p), rel=REL)


def test_no_progress_gives_no_estimate():
    assert progress_based_size(60.0, 0.0) is None


def test_progress_out_of_range_is_rejected():
    with pytest.raises(ValidationError):
        progress_based_size(60.0, 1.5)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 1.0), st.integers(0, 2**32))
def test_injected_error_stays_within_band(alpha, seed):
    est = SizeEstimate("p", 100.0, Provenance.TRAINED, 10.0, 10)
    out = inject_error(est, alpha, random.Random(seed))
    assert 100.0 * (1 - alpha) - 1e-9 <= out.serialized_size <= 100.0 * (1 + alpha) + 1e-9


def test_zero_alpha_leaves_estimate_untouched():
    est = SizeEstimate("p", 100.0, Provenance.TRAINED, 10.0, 10)
    assert inject_error(est, 0.0, random.Random(1)) is est


@pytest.mark.parametrize("bad", [dict(s=0), dict(xi=0.5), dict(delta=0), dict(alpha=1.5),
                                 dict(fit_distribution="weibull")])
def test_bad_estimator_config_is_rejected(bad):
    with pytest.raises(ValidationError):
        EstimatorConfig(**bad).validate()


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.5, 1000.0), min_size=2, max_size=10))
def test_fit_bounds_bracket_the_sample_mean(values):
    a, b = fit_uniform(values)
    mean = sum(values) / len(values)
    assert a <= mean + 1e-9 * mean <= b + 2e-9 * mean
    assert (a + b) / 2 == pytest.approx(mean, rel=1e-9)
