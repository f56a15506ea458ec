from __future__ import annotations

import io
import json

import numpy as np
import pandas as pd
import pytest
import scripts.qvt as qvt
from src.estimate import get_model, passing_threshold, resolve_model
from src.experiments import SweepSpec, run_sweep, transpile_config
from src.heavy import circuit_fidelity_estimate, heavy_set
from src.sampling import circuit_for_index
from src.simulate import density_run, ideal_state, output_state_fidelity
from src.transpile import OptLevel, transpile


@pytest.mark.smoke
def test_generate_experiment_bootstrap_chain(tmp_path, capsys):
    """Run an experiment through the CLI and re-bound its recorded counts."""
    out_dir = tmp_path / "exp"
    code = qvt.main(
        [
            "experiment",
            "--n",
            "3",
            "--circuits",
            "12",
            "--shots",
            "30",
            "--model",
            "semi_realistic",
            "--eps",
            "5e-3",
            "--n-b",
            "200",
            "--out",
            str(out_dir),
            "--quiet",
        ]
    )
    report = json.loads(capsys.readouterr().out)
    assert code == 0
    assert report["level"] == "high"
    assert report["mean_noisy_heavy"] <= report["mean_ideal_heavy"]

    code = qvt.main(
        ["bootstrap", "--data", str(out_dir / "heavy_counts.jsonl"), "--n-b", "200", "--n", "3"]
    )
    rebound = json.loads(capsys.readouterr().out)
    assert code == 0
    assert rebound["n_c"] == 12
    assert rebound["original"]["lower"] == pytest.approx(report["original"]["lower"])


@pytest.mark.smoke
def test_sweep_with_preset_prints_thresholds(tmp_path, capsys):
    code = qvt.main(
        [
            "sweep",
            "--preset",
            "quick",
            "--n-list",
            "2",
            "--levels",
            "medium",
            "--eps-list",
            "1e-2",
            "1e-1",
            "--circuits",
            "3",
            "--out",
            str(tmp_path),
            "--quiet",
        ]
    )
    out = capsys.readouterr().out
    assert code == 0
    frame = pd.read_csv(io.StringIO(out))
    assert frame[["n", "model", "level"]].values.tolist() == [[2, "tq_depolarizing", "medium"]]
    assert (tmp_path / "summary.csv").exists()
    assert len(list((tmp_path / "points").glob("*.jsonl"))) == 2


@pytest.mark.slow
def test_estimator_tracks_simulated_thresholds(tmp_path):
    spec = SweepSpec(
        n_list=(4, 6),
        models=("tq_depolarizing",),
        eps_list=tuple(float(e) for e in np.geomspace(3e-3, 1e-1, 8)),
        levels=(OptLevel.HIGH,),
        circuits=200,
        seed=3,
        out_dir=tmp_path,
    )
    run_sweep(spec, quiet=True)
    thresholds = pd.read_csv(tmp_path / "thresholds.csv")
    for row in thresholds.itertuples():
        estimate = passing_threshold(row.model, row.n, "high", "avg")
        assert row.threshold / estimate == pytest.approx(1.0, abs=0.35)


@pytest.mark.slow
def test_fidelity_estimate_overestimates_state_fidelity():
    n, circuits = 6, 30
    noise_spec = get_model("semi_realistic")
    grid = np.geomspace(1e-3, 3e-2, 10)
    above = 0
    for eps in grid:
        noise = resolve_model(noise_spec, float(eps))
        cfg = transpile_config(OptLevel.HIGH, float(eps))
        ideal, noisy, fids = [], [], []
        for i in range(circuits):
            circuit = circuit_for_index(n, 21, i)
            compiled = transpile(circuit, cfg)
            psi = ideal_state(circuit)
            analysis = heavy_set(np.abs(psi) ** 2).with_noisy(density_run(compiled, noise))
            ideal.append(analysis.ideal_heavy_prob)
            noisy.append(analysis.noisy_heavy_prob)
            fids.append(output_state_fidelity(compiled, noise, target=psi))
        est = circuit_fidelity_estimate(float(np.mean(noisy)), float(np.mean(ideal)), n)
        above += est.value > np.mean(fids)
    assert above >= 0.9 * len(grid)
