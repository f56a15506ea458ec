from __future__ import annotations

import math

import numpy as np
import pytest
from src.estimate import (
    MODELS,
    PASSING,
    block_keep,
    convert,
    gates_per_block,
    get_model,
    implied_magnitude,
    max_eps,
    passing_qubits,
    passing_threshold,
    resolve_model,
    scalable_success,
    threshold_or_none,
)
from src.heavy import h_ideal_haar
from src.simulate import NoiseSpec

SAMPLES = 500


def test_convert_known_values():
    assert convert(0.9, "avg", "proc", 4) == pytest.approx(0.875)
    assert convert(0.875, "proc", "avg", 4) == pytest.approx(0.9)
    assert convert(0.0, "dep", "avg", 2) == pytest.approx(0.5)
    assert convert(1.0, "avg", "dep", 4) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        convert(1.5, "avg", "dep", 4)
    with pytest.raises(ValueError):
        convert(0.5, "avg", "fid", 4)


def test_registry_lookup():
    assert len(MODELS) == 9
    assert get_model("TQ-Depolarizing").name == "tq_depolarizing"
    assert get_model(MODELS["memory"]) is MODELS["memory"]
    with pytest.raises(ValueError, match="unknown error model"):
        get_model("thermal")


def test_resolve_model_bounds():
    spec = get_model("tq_depolarizing")
    assert max_eps(spec) == pytest.approx(0.93)
    noise = resolve_model(spec, 0.0)
    assert noise.is_noiseless
    with pytest.raises(ValueError):
        resolve_model(spec, -1e-3)
    with pytest.raises(ValueError):
        resolve_model(spec, 0.95)


@pytest.mark.parametrize("name", ["tq_depolarizing", "tq_coherent", "semi_realistic", "tq_mixed"])
def test_normalized_sources_sum_to_eps(name):
    noise = resolve_model(get_model(name), 2e-3)
    assert implied_magnitude(noise) == pytest.approx(2e-3, rel=1e-9)


def test_unscaled_crosstalk_has_fixed_floor():
    noise = resolve_model(get_model("unscaled_crosstalk"), 0.0)
    assert noise.p_xtalk == pytest.approx(2e-3)
    assert noise.p_tq_dep == 0.0


def test_block_keep_limits():
    assert block_keep(NoiseSpec(), 3) == pytest.approx(1.0)
    assert block_keep(NoiseSpec(p_tq_dep=0.1), 2) == pytest.approx(0.81)
    assert block_keep(NoiseSpec(p_tq_dep=0.1), 0) == pytest.approx(1.0)


def test_block_keep_counts_crosstalk_once_per_gate():
    # one depolarizing term of average infidelity p/2 per CNOT: (4 (1 - p/2) - 1) / 3
    p = 0.02
    assert block_keep(NoiseSpec(p_xtalk=p), 1) == pytest.approx(2.96 / 3)
    assert block_keep(NoiseSpec(p_xtalk=p), 3) == pytest.approx((2.96 / 3) ** 3)
    assert block_keep(NoiseSpec(p_xtalk=p), 1) == pytest.approx(convert(1 - p / 2, "avg", "dep", 4))


def test_gates_per_block_limits():
    assert gates_per_block(0.0, samples=SAMPLES) == pytest.approx(3.0)
    assert gates_per_block(1.0, samples=SAMPLES) == pytest.approx(0.0)
    counts = [gates_per_block(t, samples=SAMPLES) for t in (1e-4, 1e-3, 1e-2, 1e-1)]
    assert all(b <= a for a, b in zip(counts, counts[1:]))
    assert gates_per_block(1e-2, True, SAMPLES) <= gates_per_block(1e-2, False, SAMPLES)
    with pytest.raises(ValueError):
        gates_per_block(-0.1)


@pytest.mark.parametrize("opt", ["low", "medium", "high"])
@pytest.mark.parametrize("n", [2, 5, 8])
def test_noiseless_success_is_ideal(opt, n):
    res = scalable_success("tq_depolarizing", 0.0, n, opt, samples=SAMPLES)
    assert res.success == pytest.approx(h_ideal_haar(n))
    assert res.passed


def test_low_level_block_count():
    res = scalable_success("tq_depolarizing", 1e-3, 4, "low")
    assert res.blocks == 8
    assert res.gates_per_block == 3.0
    assert scalable_success("tq_depolarizing", 1e-3, 4, "medium").blocks < 8


def test_success_decreases_with_eps():
    values = [
        scalable_success("semi_realistic", eps, 5, "medium").success
        for eps in np.geomspace(1e-4, 5e-2, 12)
    ]
    assert all(b < a for a, b in zip(values, values[1:]))
    assert values[-1] >= 0.5


def test_success_rejects_tiny_width():
    with pytest.raises(ValueError):
        scalable_success("tq_depolarizing", 1e-3, 1)


def test_threshold_shrinks_with_width():
    thresholds = [passing_threshold("tq_depolarizing", n, "medium") for n in (3, 4, 5, 6)]
    assert all(b < a for a, b in zip(thresholds, thresholds[1:]))
    at = scalable_success("tq_depolarizing", thresholds[1], 4, "medium")
    assert at.success == pytest.approx(PASSING, abs=1e-9)


def test_process_method_is_stricter():
    avg = passing_threshold("tq_depolarizing", 5, "medium", "avg")
    proc = passing_threshold("tq_depolarizing", 5, "medium", "proc")
    assert proc <= avg
    assert threshold_or_none("tq_depolarizing", 5, "medium", "proc") == pytest.approx(proc)


def test_passing_qubits_shrinks_with_eps():
    wide = passing_qubits("tq_depolarizing", 1e-3, "medium", n_max=30)
    narrow = passing_qubits("tq_depolarizing", 1e-2, "medium", n_max=30)
    assert 2 <= narrow < wide


def test_fixed_crosstalk_caps_passing_width():
    best = passing_qubits("unscaled_crosstalk", 0.0, "high", samples=SAMPLES)
    assert 18 <= best <= 26
    # an ideal device passes every width scanned
    assert passing_qubits("tq_depolarizing", 0.0, "high", n_max=20, samples=SAMPLES) == 20


def test_coherent_angle_matches_infidelity():
    noise = resolve_model(get_model("tq_coherent"), 1e-2)
    spec = get_model("tq_coherent")
    r_coh = 4 / 5 * math.sin(noise.theta_zz / 2) ** 2
    assert r_coh == pytest.approx(spec.s_tq_coh * 1e-2 / spec.normalization)
