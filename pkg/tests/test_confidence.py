from __future__ import annotations

import math

import numpy as np
import pytest
from src.confidence import (
    PASSING,
    ExperimentData,
    PassingPoint,
    _streamed_replicates,
    ci_bootstrap,
    ci_original,
    coverage_experiment,
    crossing_prefix,
    estimate_circuit_fidelity,
    fit_width_scaling,
    passing_curve,
)
from src.errors import DataError
from src.heavy import h_ideal_haar
from src.sampling import RngHandle


def _uniform(heavy_per_circuit, n_c, shots):
    return ExperimentData.from_counts([heavy_per_circuit] * n_c, [shots] * n_c)


def test_original_interval_hand_value():
    res = ci_original(_uniform(75, 100, 100))
    assert res.h_hat == pytest.approx(0.75)
    assert res.lower == pytest.approx(0.663397459621556, abs=1e-10)
    assert not res.passed
    assert res.n_c == 100 and res.total_shots == 10_000


def test_original_interval_needs_equal_shots():
    data = ExperimentData.from_counts([5, 50], [10, 100])
    with pytest.raises(DataError):
        ci_original(data)
    assert ci_bootstrap(data, n_b=200).h_hat == pytest.approx(55 / 110)


def test_experiment_data_validation():
    with pytest.raises(ValueError):
        ExperimentData(per_circuit=())
    with pytest.raises(ValueError):
        ExperimentData.from_counts([11], [10])
    empty = ExperimentData.from_counts([0, 0], [0, 0])
    with pytest.raises(DataError):
        ci_original(empty)
    assert _uniform(3, 20, 5).prefix(4).n_c == 4


def test_bootstrap_bound_is_seeded_and_below_estimate():
    rng = np.random.default_rng(0)
    data = ExperimentData.from_counts(rng.binomial(100, 0.8, size=200), [100] * 200)
    a = ci_bootstrap(data, n_b=500, rng=RngHandle(4))
    b = ci_bootstrap(data, n_b=500, rng=RngHandle(4))
    assert a == b
    assert a.lower <= a.h_hat
    assert a.bootstrap_mean == pytest.approx(a.h_hat, abs=0.01)
    assert a.n_bootstrap == 500 and a.method == "bootstrap"


def test_bootstrap_replicates_extend_with_n_b():
    rng = np.random.default_rng(3)
    shots = np.full(40, 25)
    heavy = rng.binomial(25, 0.7, size=40)
    short = _streamed_replicates(heavy, shots, 100, RngHandle(9))
    long = _streamed_replicates(heavy, shots, 300, RngHandle(9))
    np.testing.assert_array_equal(long[:100], short)
    assert not np.array_equal(_streamed_replicates(heavy, shots, 100, RngHandle(10)), short)


def test_bootstrap_parameter_checks():
    data = _uniform(7, 10, 10)
    with pytest.raises(ValueError):
        ci_bootstrap(data, n_b=50)
    with pytest.raises(ValueError):
        ci_bootstrap(data, confidence=40.0)


def test_constant_data_gives_degenerate_bootstrap():
    res = ci_bootstrap(_uniform(10, 30, 10), n_b=200)
    assert res.lower == pytest.approx(1.0)
    assert res.bootstrap_std == pytest.approx(0.0)


def test_bootstrap_is_tighter_than_original_for_many_shots():
    rng = np.random.default_rng(1)
    probs = rng.uniform(0.6, 0.95, size=300)
    data = ExperimentData.from_counts(rng.binomial(1000, probs), [1000] * 300)
    original = ci_original(data)
    boot = ci_bootstrap(data, n_b=1000, rng=RngHandle(2))
    assert original.lower < boot.lower <= boot.h_hat


def test_coverage_experiment_shapes():
    pool = RngHandle(5).generator.uniform(0.6, 0.95, size=500)
    true_success = float(np.mean(pool))
    orig = coverage_experiment(pool, true_success, 50, 20, 200, "original", RngHandle(6))
    assert orig.coverage >= 0.95
    assert orig.reps == 200 and orig.mean_width > 0
    boot = coverage_experiment(pool, true_success, 50, 20, 50, "bootstrap", RngHandle(6), n_b=200)
    assert 0.0 <= boot.coverage <= 1.0
    with pytest.raises(ValueError):
        coverage_experiment([], 0.7, 10, 10, 10, "original", RngHandle(0))
    with pytest.raises(ValueError):
        coverage_experiment(pool, 0.7, 0, 10, 10, "original", RngHandle(0))


def test_crossing_prefix_needs_to_stay_above():
    curve = [
        PassingPoint(10, 0.70, 0.70),
        PassingPoint(20, 0.60, 0.68),
        PassingPoint(30, 0.67, 0.69),
        PassingPoint(40, 0.68, 0.70),
    ]
    assert crossing_prefix(curve, "original") == 30
    assert crossing_prefix(curve, "bootstrap") == 10
    assert crossing_prefix(curve[:2], "original") is None
    assert 2 / 3 == PASSING


def test_passing_curve_columns():
    data = _uniform(16, 40, 20)
    curve = passing_curve(data, step=10, n_b=200)
    assert [p.n_c for p in curve] == [10, 20, 30, 40]
    assert all(p.lower_original < 0.8 for p in curve)
    with pytest.raises(ValueError):
        passing_curve(_uniform(1, 5, 2))


def test_width_scaling_fit():
    n_c = np.array([10, 50, 100, 250, 500, 1000], dtype=float)
    a, resid = fit_width_scaling(n_c, 0.8 / np.sqrt(n_c))
    assert a == pytest.approx(0.8, rel=1e-6)
    assert resid == pytest.approx(0.0, abs=1e-6)


def test_estimate_circuit_fidelity_uses_haar_default():
    n = 3
    h = h_ideal_haar(n)
    shots = 1000
    data = ExperimentData.from_counts([round(h * shots)], [shots])
    assert estimate_circuit_fidelity(data, n).value == pytest.approx(1.0, abs=2e-3)
    assert estimate_circuit_fidelity(_uniform(1, 2, 2), n).value == pytest.approx(1 / 8)


@pytest.mark.slow
def test_bootstrap_crosses_earlier_on_replayed_data():
    n_c, n_s = 800, 20
    rng = np.random.default_rng(12)
    probs = np.clip(rng.normal(0.7036, 0.12, size=n_c), 0.0, 1.0)
    heavy = rng.binomial(n_s, probs)
    # pin the pooled frequency to the reported value
    target = round(0.7036 * n_c * n_s)
    while heavy.sum() != target:
        i = rng.integers(n_c)
        if heavy.sum() < target and heavy[i] < n_s:
            heavy[i] += 1
        elif heavy.sum() > target and heavy[i] > 0:
            heavy[i] -= 1
    wins = 0
    orderings = 50
    for k in range(orderings):
        perm = rng.permutation(n_c)
        data = ExperimentData.from_counts(heavy[perm], [n_s] * n_c)
        curve = passing_curve(data, step=10, n_b=200, rng=RngHandle(k))
        orig = crossing_prefix(curve, "original")
        boot = crossing_prefix(curve, "bootstrap")
        if boot is not None and (orig is None or boot <= orig / 2):
            wins += 1
    assert wins >= 0.8 * orderings


@pytest.mark.slow
def test_coverage_near_threshold():
    rng = np.random.default_rng(9)
    pool = np.clip(rng.normal(0.70, 0.1, size=1000), 0.0, 1.0)
    true_success = float(pool.mean())
    orig = coverage_experiment(pool, true_success, 100, 100, 500, "original", RngHandle(1))
    boot = coverage_experiment(
        pool, true_success, 100, 100, 500, "bootstrap", RngHandle(2), n_b=1000
    )
    assert orig.coverage >= 0.99
    assert boot.coverage >= 0.95
    assert boot.mean_width < orig.mean_width
    assert math.isfinite(boot.mean_width)
