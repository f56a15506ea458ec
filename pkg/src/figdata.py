"""CSV-ready tables behind the standard QVT figures (no plotting)."""

from __future__ import annotations

from typing import Dict, Sequence

import numpy as np
import pandas as pd
from tqdm import tqdm

from src.combinatorics import gate_count_report
from src.confidence import coverage_experiment
from src.decompose import k_cnot_fidelity, mirror_coordinates, theta_total, weyl_coordinates
from src.estimate import get_model, scalable_success, threshold_or_none
from src.heavy import (
    distribution_moments,
    h_ideal_haar,
    heavy_set,
    ks_statistic,
    mean_single_qubit_entropy,
)
from src.sampling import RngHandle, circuit_for_index, haar_su4
from src.simulate import ideal_state


def fig2_ideal_heavy(n_list: Sequence[int], circuits: int, seed: int, quiet: bool = True) -> pd.DataFrame:
    """Mean ideal heavy-output probability per N against the Haar value."""
    rows = []
    for n in n_list:
        probs = []
        for i in tqdm(range(circuits), desc=f"fig2 N={n}", disable=quiet):
            psi = ideal_state(circuit_for_index(n, seed, i))
            probs.append(heavy_set(np.abs(psi) ** 2).ideal_heavy_prob)
        arr = np.asarray(probs)
        rows.append(
            {
                "n": n,
                "mean_heavy": arr.mean(),
                "std_heavy": arr.std(),
                "always_heavy_fraction": float(np.mean(arr >= 1 - 1e-12)),
                "h_ideal_haar": h_ideal_haar(n),
            }
        )
    return pd.DataFrame(rows)


def fig3_depth(
    n_list: Sequence[int],
    depth_factors: Sequence[int],
    circuits: int,
    seed: int,
    quiet: bool = True,
) -> pd.DataFrame:
    """KS distance to the Haar law and mean marginal entropy against depth."""
    rows = []
    for n in n_list:
        for factor in depth_factors:
            outputs, entropies, heavies = [], [], []
            for i in tqdm(range(circuits), desc=f"fig3 N={n} x{factor}", disable=quiet):
                psi = ideal_state(circuit_for_index(n, seed, i, depth=factor * n))
                probs = np.abs(psi) ** 2
                outputs.append(probs)
                entropies.append(mean_single_qubit_entropy(psi))
                heavies.append(heavy_set(probs).ideal_heavy_prob)
            rows.append(
                {
                    "n": n,
                    "depth_factor": factor,
                    "mean_heavy": float(np.mean(heavies)),
                    "ks": ks_statistic(np.concatenate(outputs), n),
                    "entropy": float(np.mean(entropies)),
                }
            )
    return pd.DataFrame(rows)


def fig4_combinatorics(n_list: Sequence[int], trials: int, seed: int) -> pd.DataFrame:
    rng = RngHandle(seed)
    return pd.DataFrame([gate_count_report(n, trials, rng).model_dump() for n in n_list])


def _weyl_samples(samples: int, seed: int) -> np.ndarray:
    rng = RngHandle(seed)
    return np.array([weyl_coordinates(haar_su4(rng)) for _ in range(samples)])


def fig5_block_approximation(tols: Sequence[float], samples: int, seed: int) -> pd.DataFrame:
    """Share of blocks accepted with k CNOTs, with and without mirroring."""
    thetas = _weyl_samples(samples, seed)
    fid = np.array([[k_cnot_fidelity(t, k) for k in range(4)] for t in thetas])
    fid_m = np.array(
        [[k_cnot_fidelity(mirror_coordinates(t), k) for k in range(4)] for t in thetas]
    )
    fid[:, 3] = fid_m[:, 3] = 1.0
    rows = []
    for mirror in (False, True):
        table = np.maximum(fid, fid_m) if mirror else fid
        for tol in tols:
            k = np.argmax(table >= 1 - tol, axis=1)
            accepted = table[np.arange(len(k)), k]
            row: Dict[str, float] = {"tol": tol, "mirror": mirror}
            for c in range(4):
                row[f"frac_{c}cnot"] = float(np.mean(k == c))
            row["mean_cnots"] = float(k.mean())
            row["mean_fidelity"] = float(accepted.mean())
            rows.append(row)
    return pd.DataFrame(rows)


def fig6_theta_total(samples: int, seed: int) -> pd.DataFrame:
    """Total interaction angle of Haar blocks in units of pi."""
    thetas = _weyl_samples(samples, seed)
    plain = np.array([theta_total(t) for t in thetas]) / np.pi
    mirrored = np.minimum(plain, np.array([theta_total(mirror_coordinates(t)) for t in thetas]) / np.pi)
    return pd.DataFrame(
        [
            {"mirror": m, "mean_theta_over_pi": v.mean(), "max_theta_over_pi": v.max()}
            for m, v in ((False, plain), (True, mirrored))
        ]
    )


def fig7_estimates(
    models: Sequence[str],
    n_list: Sequence[int],
    eps_list: Sequence[float],
    opt: str = "high",
) -> pd.DataFrame:
    """Estimated success over (model, N, eps) for both fidelity methods."""
    rows = []
    for model in models:
        spec = get_model(model)
        for n in n_list:
            for method in ("avg", "proc"):
                threshold = threshold_or_none(spec, n, opt, method)
                for eps in eps_list:
                    res = scalable_success(spec, eps, n, opt, method)
                    rows.append(
                        {
                            "model": spec.name,
                            "n": n,
                            "opt": opt,
                            "method": method,
                            "eps": eps,
                            "success": res.success,
                            "threshold": np.nan if threshold is None else threshold,
                        }
                    )
    return pd.DataFrame(rows)


def fig8_moments(n_list: Sequence[int], circuits: int, seed: int, quiet: bool = True) -> pd.DataFrame:
    """Central moments (orders 2-6) of the ideal heavy-output probability per N."""
    rows = []
    for n in n_list:
        heavies = [
            heavy_set(np.abs(ideal_state(circuit_for_index(n, seed, i))) ** 2).ideal_heavy_prob
            for i in tqdm(range(circuits), desc=f"fig8 N={n}", disable=quiet)
        ]
        row: Dict[str, float] = {"n": n, "mean_heavy": float(np.mean(heavies))}
        for k, m in zip(range(2, 7), distribution_moments(heavies)):
            row[f"m{k}"] = m
        rows.append(row)
    return pd.DataFrame(rows)


def fig10_coverage(
    pool: Sequence[float],
    true_success: float,
    n_c_list: Sequence[int],
    n_s_list: Sequence[int],
    reps: int,
    seed: int,
    n_b: int = 1000,
    quiet: bool = True,
) -> pd.DataFrame:
    """Coverage and mean lower-bound width over the (n_c, n_s) grid."""
    rows = []
    grid = [(n_c, n_s) for n_c in n_c_list for n_s in n_s_list]
    for n_c, n_s in tqdm(grid, desc="fig10", disable=quiet):
        for method in ("original", "bootstrap"):
            rng = RngHandle.substream(seed, n_c, n_s)
            res = coverage_experiment(pool, true_success, n_c, n_s, reps, method, rng, n_b=n_b)
            rows.append(
                {
                    "n_c": n_c,
                    "n_s": n_s,
                    "method": method,
                    "coverage": res.coverage,
                    "mean_width": res.mean_width,
                }
            )
    return pd.DataFrame(rows)
