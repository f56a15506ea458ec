from __future__ import annotations

import json
import math

import pandas as pd
import pytest
import src.experiments as experiments
from src.experiments import (
    SweepSpec,
    generate_circuits,
    interpolate_threshold,
    point_path,
    run_experiment,
    run_sweep,
    transpile_config,
    worker_count,
    write_outcome,
)
from src.parsers import load_heavy_counts, load_simulation_records
from src.transpile import NativeGate, OptLevel


def test_transpile_config_rules():
    medium = transpile_config("medium", 0.01, mirror=True)
    assert medium.tol == 0.0 and not medium.mirror
    high = transpile_config("high", 2.0)
    assert high.tol == 1.0 and high.mirror
    arb = transpile_config("medium", 0.01, arb_angle=True)
    assert arb.mirror and arb.native_two_qubit == NativeGate.ARB_ANGLE


def test_worker_count(monkeypatch):
    monkeypatch.setenv("QVT_THREADS", "3")
    assert worker_count() == 3
    assert worker_count(0) == 1
    monkeypatch.setenv("QVT_THREADS", "many")
    assert worker_count() == 1


def test_generate_circuits_is_deterministic(tmp_path):
    a = generate_circuits(3, 3, 9, tmp_path / "a")
    b = generate_circuits(3, 3, 9, tmp_path / "b")
    assert [p.name for p in a] == ["qvt_n3_00000.json", "qvt_n3_00001.json", "qvt_n3_00002.json"]
    assert [p.read_bytes() for p in a] == [p.read_bytes() for p in b]
    with pytest.raises(ValueError):
        generate_circuits(1, 1, 0, tmp_path / "c")


def test_noiseless_experiment_keeps_ideal_heavy():
    out = run_experiment(3, 6, 50, "tq_depolarizing", 0.0, "medium", seed=2, n_b=200, quiet=True)
    assert out.mean_noisy_heavy == pytest.approx(out.mean_ideal_heavy, abs=1e-9)
    assert out.data.n_c == 6
    assert all(r.shots == 50 for r in out.data.per_circuit)
    again = run_experiment(3, 6, 50, "tq_depolarizing", 0.0, "medium", seed=2, n_b=200, quiet=True)
    assert again.data == out.data
    assert again.bootstrap.lower == out.bootstrap.lower


def test_experiment_rejects_bad_sizes():
    with pytest.raises(ValueError):
        run_experiment(1, 5, 5, "tq_depolarizing", 0.0)
    with pytest.raises(ValueError):
        run_experiment(3, 0, 5, "tq_depolarizing", 0.0)
    with pytest.raises(ValueError):
        run_experiment(3, 5, 5, "no_such_model", 0.0)


def test_interpolate_threshold_on_linear_data():
    xs = [-3.0, -2.5, -2.0, -1.5, -1.0]
    eps = [10**x for x in xs]
    success = [0.9 - 0.2 * (x + 3) for x in xs]
    assert math.log10(interpolate_threshold(eps, success)) == pytest.approx(-1.8333333, abs=1e-6)
    # order of the inputs does not matter
    assert interpolate_threshold(eps[::-1], success[::-1]) == pytest.approx(
        interpolate_threshold(eps, success)
    )
    assert interpolate_threshold(eps, [0.9] * 5) is None
    assert interpolate_threshold(eps, [0.6] * 5) is None
    assert interpolate_threshold([1e-3], [0.9]) is None


def test_sweep_reuses_finished_points(tmp_path, monkeypatch):
    calls = []
    real = experiments.run_jobs

    def counting(jobs, threads, **kwargs):
        calls.append(len(jobs))
        return real(jobs, threads, **kwargs)

    monkeypatch.setattr(experiments, "run_jobs", counting)
    spec = SweepSpec(
        n_list=(2,),
        models=("tq_depolarizing",),
        eps_list=(1e-3, 1e-2),
        levels=(OptLevel.MEDIUM,),
        circuits=3,
        out_dir=tmp_path,
    )
    first = run_sweep(spec, threads=1, quiet=True)
    assert calls == [3, 3]
    assert point_path(tmp_path, 2, "tq_depolarizing", OptLevel.MEDIUM, 1e-2).exists()
    second = run_sweep(spec, threads=1, quiet=True)
    assert calls == [3, 3]
    pd.testing.assert_frame_equal(first, second)
    thresholds = pd.read_csv(tmp_path / "thresholds.csv")
    assert list(thresholds.columns) == [
        "n",
        "model",
        "level",
        "threshold",
        "estimate_avg",
        "estimate_proc",
    ]
    assert not list(tmp_path.glob("points/*.tmp"))


def test_one_point_sweep_matches_experiment(tmp_path):
    spec = SweepSpec(
        n_list=(3,),
        models=("semi_realistic",),
        eps_list=(1e-2,),
        levels=(OptLevel.MEDIUM,),
        circuits=4,
        seed=5,
        out_dir=tmp_path,
    )
    summary = run_sweep(spec, threads=1, quiet=True)
    outcome = run_experiment(3, 4, 10, "semi_realistic", 1e-2, "medium", seed=5, n_b=200, quiet=True)
    assert summary.loc[0, "mean_noisy_heavy"] == pytest.approx(outcome.mean_noisy_heavy, abs=1e-12)
    path = point_path(tmp_path, 3, "semi_realistic", OptLevel.MEDIUM, 1e-2)
    assert [r.seed for r in load_simulation_records(path)] == [s.seed for s in outcome.simulations]


def test_sweep_spec_validation(tmp_path):
    with pytest.raises(ValueError):
        SweepSpec(n_list=(), models=("tq_depolarizing",), out_dir=tmp_path)
    with pytest.raises(ValueError):
        SweepSpec(n_list=(1,), models=("tq_depolarizing",), out_dir=tmp_path)
    spec = SweepSpec(n_list=(2, 3), models=("TQ-Depolarizing",), eps_list=(1e-3,), out_dir=tmp_path)
    assert spec.models == ("tq_depolarizing",)
    assert len(list(spec.points())) == 2


def test_write_outcome_replaces_files(tmp_path):
    out = run_experiment(2, 3, 20, "tq_depolarizing", 1e-3, "medium", seed=1, n_b=200, quiet=True)
    write_outcome(out, tmp_path)
    write_outcome(out, tmp_path)
    assert len(load_heavy_counts(tmp_path / "heavy_counts.jsonl")) == 3
    assert len(load_simulation_records(tmp_path / "simulations.jsonl")) == 3
    report = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
    assert report["circuits"] == 3
    assert report["original"]["method"] == "original"
    assert report["level"] == "medium"
