from __future__ import annotations

import math

import numpy as np
import pytest
from src.combinatorics import (
    enumerate_arrangements,
    expected_rounds,
    expected_tq_gates,
    f_arrangements,
    g_no_repeats,
    gate_count_report,
    h_exact_repeats,
    monte_carlo_savings,
    sample_tq_count,
    savings_ratio,
    savings_table,
    shared_pairs,
)
from src.sampling import RngHandle, nearest_neighbor_arrangement


@pytest.mark.parametrize("n, f", [(2, 1), (3, 3), (4, 3), (5, 15), (6, 15), (7, 105), (8, 105)])
def test_arrangement_counts(n, f):
    assert f_arrangements(n) == f


@pytest.mark.parametrize("n", range(2, 9))
def test_counts_match_brute_force(n):
    ref = nearest_neighbor_arrangement(n)
    arrangements = list(enumerate_arrangements(n))
    assert len(arrangements) == f_arrangements(n)
    shared = [shared_pairs(ref, a) for a in arrangements]
    assert shared.count(0) == g_no_repeats(n)
    for m in range(n // 2 + 1):
        assert shared.count(m) == h_exact_repeats(n, m)


def test_h_rejects_out_of_range():
    with pytest.raises(ValueError):
        h_exact_repeats(4, 3)
    with pytest.raises(ValueError):
        h_exact_repeats(4, -1)


def test_small_widths():
    # N=2 always repeats the only pair: one block
    assert expected_tq_gates(2) == pytest.approx(3.0)
    assert expected_tq_gates(3) == pytest.approx(7.0)
    assert savings_ratio(3) == pytest.approx(7 / 9)
    with pytest.raises(ValueError):
        expected_tq_gates(1)


@pytest.mark.parametrize("n", [2, 4, 6, 8, 10, 12])
def test_even_savings_ratio(n):
    assert savings_ratio(n) == pytest.approx((n - 1) / n, abs=1e-9)


def test_expected_rounds_scales_block_count():
    n = 6
    assert expected_rounds(n) * 3 * (n // 2) == pytest.approx(expected_tq_gates(n))


@pytest.mark.parametrize("n", [3, 4, 5, 7])
def test_monte_carlo_agrees(n):
    trials = 4000
    mean, std = monte_carlo_savings(n, trials, RngHandle(n))
    assert abs(mean - expected_tq_gates(n)) <= 4 * std / math.sqrt(trials) + 1e-9


def test_sample_count_bounds():
    rng = RngHandle(1)
    for _ in range(50):
        count = sample_tq_count(5, rng)
        assert 3 * 2 <= count <= 3 * 2 * 5
        assert count % 3 == 0


def test_gate_count_report_fields():
    rep = gate_count_report(4, trials=200, rng=RngHandle(0))
    assert rep.f == 3
    assert rep.savings_ratio == pytest.approx(0.75)
    assert rep.mc_mean is not None and rep.std_dev is not None
    assert rep.std_dev >= 0
    assert gate_count_report(4).mc_mean is None


def test_savings_table_order():
    rows = savings_table([2, 3, 4], 0, RngHandle(0))
    assert [r.n for r in rows] == [2, 3, 4]
    assert np.all(np.diff([r.expected_tq for r in rows]) > 0)
