"""End-to-end QVT runs: generate, transpile, simulate, sample shots, bound.

Every circuit and every shot batch draws from its own substream of the
master seed, so results do not depend on worker count or ordering.
"""

from __future__ import annotations

import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, field_validator
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq
from tqdm import tqdm

from src.confidence import CiResult, ExperimentData, ci_bootstrap, ci_original
from src.estimate import PASSING, get_model, resolve_model, threshold_or_none
from src.heavy import heavy_set
from src.parsers.circuit_json import dump_circuit
from src.parsers.experiment_jsonl import append_jsonl, load_simulation_records
from src.records import HeavyCountRecord, SimulationRecord
from src.sampling import RngHandle, circuit_for_index
from src.simulate import NoiseSpec, density_run, statevector_run
from src.transpile import NativeGate, OptLevel, TranspileConfig, transpile

# substream labels, kept apart from circuit indices by the extra key
SHOT_STREAM = 1
BOOTSTRAP_STREAM = 2

DEFAULT_EPS = tuple(float(x) for x in np.logspace(-3.25, -1.25, 7))


def log(tag: str, msg: str) -> None:
    print(f"[qvt {tag}] {msg}", file=sys.stderr)


def worker_count(requested: Optional[int] = None) -> int:
    if requested is not None:
        return max(1, int(requested))
    raw = os.getenv("QVT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def transpile_config(
    level: OptLevel, eps: float, *, mirror: bool = True, arb_angle: bool = False
) -> TranspileConfig:
    """Config used by experiments: high level approximates with tol = eps."""
    level = OptLevel(level)
    native = NativeGate.ARB_ANGLE if arb_angle else NativeGate.CNOT
    use_mirror = mirror and (level == OptLevel.HIGH or arb_angle)
    tol = min(eps, 1.0) if level == OptLevel.HIGH else 0.0
    return TranspileConfig(level=level, tol=tol, mirror=use_mirror, native_two_qubit=native)


def generate_circuits(n: int, count: int, seed: int, out_dir: Path) -> List[Path]:
    """Write ``count`` circuit files; file i always holds circuit index i."""
    if n < 2:
        raise ValueError("QVT circuits need at least two qubits")
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(count):
        path = out_dir / f"qvt_n{n}_{i:05d}.json"
        dump_circuit(circuit_for_index(n, seed, i), path)
        paths.append(path)
    return paths


@dataclass(frozen=True)
class CircuitJob:
    n: int
    seed: int
    index: int
    model: str
    eps: float
    cfg: TranspileConfig
    noise: NoiseSpec
    shots: int


def run_circuit(job: CircuitJob) -> Tuple[SimulationRecord, HeavyCountRecord]:
    """Simulate one circuit; heavy outputs come from the uncompiled circuit."""
    circuit = circuit_for_index(job.n, job.seed, job.index)
    compiled = transpile(circuit, job.cfg)
    analysis = heavy_set(statevector_run(circuit))
    noisy = density_run(compiled, job.noise)
    analysis = analysis.with_noisy(noisy)
    heavy_count = 0
    if job.shots > 0:
        g = RngHandle.substream(job.seed, job.n, job.index, SHOT_STREAM).generator
        counts = g.multinomial(job.shots, noisy.probs)
        heavy_count = int(counts[list(analysis.heavy_set)].sum()) if analysis.heavy_set else 0
    sim = SimulationRecord(
        seed=circuit.seed,
        n=job.n,
        level=job.cfg.level.value,
        model=job.model,
        eps=job.eps,
        ideal_heavy_prob=analysis.ideal_heavy_prob,
        noisy_heavy_prob=float(analysis.noisy_heavy_prob),
    )
    return sim, HeavyCountRecord(circuit_seed=circuit.seed, heavy_count=heavy_count, shots=job.shots)


def run_jobs(
    jobs: Sequence[CircuitJob], threads: int, *, desc: str = "circuits", quiet: bool = False
) -> List[Tuple[SimulationRecord, HeavyCountRecord]]:
    if threads <= 1:
        return [run_circuit(j) for j in tqdm(jobs, desc=desc, disable=quiet, file=sys.stderr)]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        it = pool.map(run_circuit, jobs, chunksize=max(1, len(jobs) // (4 * threads)))
        return list(tqdm(it, total=len(jobs), desc=desc, disable=quiet, file=sys.stderr))


def _jobs(
    n: int, count: int, seed: int, model: str, eps: float, cfg: TranspileConfig, shots: int
) -> List[CircuitJob]:
    noise = resolve_model(get_model(model), eps)
    return [CircuitJob(n, seed, i, model, eps, cfg, noise, shots) for i in range(count)]


class ExperimentOutcome(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    model: str
    eps: float
    level: OptLevel
    seed: int
    mean_ideal_heavy: float
    mean_noisy_heavy: float
    data: ExperimentData
    simulations: Tuple[SimulationRecord, ...]
    original: CiResult
    bootstrap: CiResult

    def summary(self) -> dict:
        return {
            "n": self.n,
            "model": self.model,
            "eps": self.eps,
            "level": self.level.value,
            "seed": self.seed,
            "circuits": self.data.n_c,
            "mean_ideal_heavy": self.mean_ideal_heavy,
            "mean_noisy_heavy": self.mean_noisy_heavy,
            "original": self.original.model_dump(),
            "bootstrap": self.bootstrap.model_dump(),
        }


def run_experiment(
    n: int,
    n_c: int,
    n_s: int,
    model: str,
    eps: float,
    level: OptLevel = OptLevel.HIGH,
    seed: int = 0,
    *,
    mirror: bool = True,
    arb_angle: bool = False,
    n_b: int = 1000,
    threads: Optional[int] = None,
    quiet: bool = False,
) -> ExperimentOutcome:
    if n < 2:
        raise ValueError("QVT circuits need at least two qubits")
    if n_c < 1 or n_s < 1:
        raise ValueError("n_c and n_s must be positive")
    spec = get_model(model)
    cfg = transpile_config(level, eps, mirror=mirror, arb_angle=arb_angle)
    jobs = _jobs(n, n_c, seed, spec.name, eps, cfg, n_s)
    results = run_jobs(jobs, worker_count(threads), desc=f"N={n} {spec.name}", quiet=quiet)
    sims = tuple(s for s, _ in results)
    data = ExperimentData(per_circuit=tuple(h for _, h in results))
    boot_rng = RngHandle.substream(seed, n, BOOTSTRAP_STREAM, n_c)
    return ExperimentOutcome(
        n=n,
        model=spec.name,
        eps=eps,
        level=cfg.level,
        seed=seed,
        mean_ideal_heavy=float(np.mean([s.ideal_heavy_prob for s in sims])),
        mean_noisy_heavy=float(np.mean([s.noisy_heavy_prob for s in sims])),
        data=data,
        simulations=sims,
        original=ci_original(data),
        bootstrap=ci_bootstrap(data, n_b=n_b, rng=boot_rng),
    )


class SweepSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_list: Tuple[int, ...]
    models: Tuple[str, ...]
    eps_list: Tuple[float, ...] = DEFAULT_EPS
    levels: Tuple[OptLevel, ...] = (OptLevel.HIGH,)
    circuits: int = 100
    seed: int = 0
    out_dir: Path = Path("results/sweep")
    mirror: bool = True

    @field_validator("n_list", "models", "eps_list", "levels", mode="after")
    @classmethod
    def non_empty(cls, v: tuple) -> tuple:
        if not v:
            raise ValueError("sweep lists must not be empty")
        return v

    @field_validator("n_list", mode="after")
    @classmethod
    def widths(cls, v: Tuple[int, ...]) -> Tuple[int, ...]:
        if any(n < 2 for n in v):
            raise ValueError("sweep widths must be at least 2")
        return v

    @field_validator("models", mode="after")
    @classmethod
    def known_models(cls, v: Tuple[str, ...]) -> Tuple[str, ...]:
        return tuple(get_model(m).name for m in v)

    @field_validator("circuits", mode="after")
    @classmethod
    def positive_circuits(cls, v: int) -> int:
        if v < 1:
            raise ValueError("circuits must be positive")
        return v

    def points(self) -> Iterable[Tuple[int, str, OptLevel, float]]:
        for n in self.n_list:
            for model in self.models:
                for level in self.levels:
                    for eps in self.eps_list:
                        yield n, model, level, eps


def point_path(out_dir: Path, n: int, model: str, level: OptLevel, eps: float) -> Path:
    return out_dir / "points" / f"point_n{n}_{model}_{OptLevel(level).value}_eps{eps:.6e}.jsonl"


def _write_atomic(path: Path, records: Sequence[BaseModel]) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    if tmp.exists():
        tmp.unlink()
    append_jsonl(tmp, records)
    os.replace(tmp, path)


def interpolate_threshold(eps: Sequence[float], success: Sequence[float]) -> Optional[float]:
    """eps where a monotone cubic through (log10 eps, success) crosses 2/3."""
    order = np.argsort(eps)
    x = np.log10(np.asarray(eps, dtype=float)[order])
    y = np.asarray(success, dtype=float)[order]
    if x.size < 2 or y[0] <= PASSING:
        return None
    below = np.flatnonzero(y <= PASSING)
    if below.size == 0:
        return None
    i = int(below[0])
    curve = PchipInterpolator(x, y)
    if y[i] == PASSING:
        return float(10 ** x[i])
    root = brentq(lambda t: float(curve(t)) - PASSING, x[i - 1], x[i])
    return float(10**root)


def run_sweep(spec: SweepSpec, *, threads: Optional[int] = None, quiet: bool = False) -> pd.DataFrame:
    """Run every grid point not already on disk; returns the per-point summary.

    Writes ``summary.csv`` and ``thresholds.csv`` into the output directory.
    """
    out_dir = Path(spec.out_dir)
    (out_dir / "points").mkdir(parents=True, exist_ok=True)
    workers = worker_count(threads)
    points = list(spec.points())
    rows = []
    for k, (n, model, level, eps) in enumerate(points, start=1):
        path = point_path(out_dir, n, model, level, eps)
        if path.exists():
            sims = load_simulation_records(path)
            log("sweep", f"point {k}/{len(points)} cached: N={n} {model} {level.value} eps={eps:.3e}")
        else:
            log("sweep", f"point {k}/{len(points)}: N={n} {model} {level.value} eps={eps:.3e}")
            cfg = transpile_config(level, eps, mirror=spec.mirror)
            jobs = _jobs(n, spec.circuits, spec.seed, model, eps, cfg, 0)
            sims = [s for s, _ in run_jobs(jobs, workers, desc=f"point {k}", quiet=quiet)]
            _write_atomic(path, sims)
        rows.append(
            {
                "n": n,
                "model": model,
                "level": level.value,
                "eps": eps,
                "circuits": len(sims),
                "mean_ideal_heavy": float(np.mean([s.ideal_heavy_prob for s in sims])),
                "mean_noisy_heavy": float(np.mean([s.noisy_heavy_prob for s in sims])),
                "std_noisy_heavy": float(np.std([s.noisy_heavy_prob for s in sims])),
            }
        )
    summary = pd.DataFrame(rows)
    summary.to_csv(out_dir / "summary.csv", index=False)
    sweep_thresholds(summary).to_csv(out_dir / "thresholds.csv", index=False)
    return summary


def sweep_thresholds(summary: pd.DataFrame) -> pd.DataFrame:
    """Interpolated simulation thresholds next to the estimator's avg/proc values."""
    rows = []
    for (n, model, level), grp in summary.groupby(["n", "model", "level"], sort=True):
        simulated = interpolate_threshold(grp["eps"].tolist(), grp["mean_noisy_heavy"].tolist())
        rows.append(
            {
                "n": int(n),
                "model": model,
                "level": level,
                "threshold": math.nan if simulated is None else simulated,
                "estimate_avg": threshold_or_none(model, int(n), level, "avg") or math.nan,
                "estimate_proc": threshold_or_none(model, int(n), level, "proc") or math.nan,
            }
        )
    return pd.DataFrame(
        rows, columns=["n", "model", "level", "threshold", "estimate_avg", "estimate_proc"]
    )


def write_outcome(outcome: ExperimentOutcome, out_dir: Path) -> None:
    """heavy_counts.jsonl, simulations.jsonl and report.json for one experiment."""
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, records in (
        ("heavy_counts.jsonl", outcome.data.per_circuit),
        ("simulations.jsonl", outcome.simulations),
    ):
        path = out_dir / name
        if path.exists():
            path.unlink()
        append_jsonl(path, records)
    (out_dir / "report.json").write_text(
        json.dumps(outcome.summary(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
