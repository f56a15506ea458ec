"""Lower confidence bounds on the heavy-output frequency.

Two methods are provided: the two-sigma binomial bound on the pooled
frequency and a semi-parametric bootstrap that resamples circuits and then
redraws each circuit's heavy counts binomially.
"""

from __future__ import annotations

import math
from typing import List, Literal, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator
from scipy.optimize import curve_fit

from src.errors import DataError
from src.heavy import FidelityEstimate, circuit_fidelity_estimate, h_ideal_haar
from src.records import HeavyCountRecord
from src.sampling import RngHandle

PASSING = 2.0 / 3.0
TWO_SIGMA = 97.73
DEFAULT_BOOTSTRAPS = 1000

CiMethod = Literal["original", "bootstrap"]


class ExperimentData(BaseModel):
    model_config = ConfigDict(frozen=True)

    per_circuit: Tuple[HeavyCountRecord, ...]

    @field_validator("per_circuit", mode="after")
    @classmethod
    def not_empty(cls, v: Tuple[HeavyCountRecord, ...]) -> Tuple[HeavyCountRecord, ...]:
        if not v:
            raise ValueError("experiment data needs at least one circuit")
        return v

    @classmethod
    def from_counts(
        cls, heavy: Sequence[int], shots: Sequence[int], seeds: Optional[Sequence[int]] = None
    ) -> "ExperimentData":
        seeds = range(len(heavy)) if seeds is None else seeds
        return cls(
            per_circuit=tuple(
                HeavyCountRecord(circuit_seed=int(s), heavy_count=int(h), shots=int(n))
                for s, h, n in zip(seeds, heavy, shots)
            )
        )

    @property
    def n_c(self) -> int:
        return len(self.per_circuit)

    @property
    def heavy(self) -> np.ndarray:
        return np.array([r.heavy_count for r in self.per_circuit], dtype=np.int64)

    @property
    def shots(self) -> np.ndarray:
        return np.array([r.shots for r in self.per_circuit], dtype=np.int64)

    @property
    def uniform_shots(self) -> bool:
        return len({r.shots for r in self.per_circuit}) == 1

    @property
    def h_hat(self) -> float:
        total = int(self.shots.sum())
        if total == 0:
            raise DataError("experiment data has no shots")
        return float(self.heavy.sum() / total)

    def prefix(self, n_c: int) -> "ExperimentData":
        return ExperimentData(per_circuit=self.per_circuit[:n_c])


class CiResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    method: CiMethod
    h_hat: float
    lower: float
    confidence: float = TWO_SIGMA
    n_c: int
    total_shots: int
    n_bootstrap: Optional[int] = None
    bootstrap_mean: Optional[float] = None
    bootstrap_std: Optional[float] = None
    passed: bool


class CoverageResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    method: CiMethod
    coverage: float
    mean_width: float
    reps: int


class PassingPoint(NamedTuple):
    n_c: int
    lower_original: float
    lower_bootstrap: float


def _original_lower(heavy: np.ndarray, shots: np.ndarray) -> Tuple[float, float]:
    h = float(heavy.sum() / shots.sum())
    return h, h - 2 * math.sqrt(max(h * (1 - h), 0.0) / heavy.size)


def _bootstrap_replicates(
    heavy: np.ndarray, shots: np.ndarray, n_b: int, g: np.random.Generator
) -> np.ndarray:
    n_c = heavy.size
    freqs = np.divide(heavy, shots, out=np.zeros(n_c), where=shots > 0)
    idx = g.integers(0, n_c, size=(n_b, n_c))
    s = shots[idx]
    draws = g.binomial(s, freqs[idx])
    totals = s.sum(axis=1)
    return np.divide(draws.sum(axis=1), totals, out=np.full(n_b, np.nan), where=totals > 0)


def _streamed_replicates(
    heavy: np.ndarray, shots: np.ndarray, n_b: int, rng: RngHandle
) -> np.ndarray:
    """Replicate j comes from child stream j of ``rng``; a larger n_b only appends replicates."""
    children = np.random.SeedSequence(rng.seed).spawn(n_b)
    return np.concatenate(
        [_bootstrap_replicates(heavy, shots, 1, np.random.default_rng(c)) for c in children]
    )


def _lower_from_replicates(
    heavy: np.ndarray, shots: np.ndarray, r: np.ndarray, confidence: float
) -> Tuple[float, float]:
    h = float(heavy.sum() / shots.sum())
    r_bar = float(np.nanmean(r))
    lower = 2 * r_bar - float(np.nanquantile(r, confidence / 100.0, method="linear"))
    return h, min(lower, h)


def _bootstrap_lower(
    heavy: np.ndarray, shots: np.ndarray, n_b: int, confidence: float, g: np.random.Generator
) -> Tuple[float, float, np.ndarray]:
    r = _bootstrap_replicates(heavy, shots, n_b, g)
    return (*_lower_from_replicates(heavy, shots, r, confidence), r)


def ci_original(data: ExperimentData) -> CiResult:
    """h_hat - 2 sqrt(h_hat (1 - h_hat) / n_c); needs equal shots per circuit."""
    shots = data.shots
    if shots.sum() == 0:
        raise DataError("experiment data has no shots")
    if not data.uniform_shots:
        raise DataError("the original interval assumes the same number of shots per circuit")
    h, lower = _original_lower(data.heavy, shots)
    return CiResult(
        method="original",
        h_hat=h,
        lower=lower,
        n_c=data.n_c,
        total_shots=int(shots.sum()),
        passed=lower > PASSING,
    )


def ci_bootstrap(
    data: ExperimentData,
    n_b: int = DEFAULT_BOOTSTRAPS,
    confidence: float = TWO_SIGMA,
    rng: Optional[RngHandle] = None,
) -> CiResult:
    """Basic bootstrap lower bound: 2 mean(r) - quantile(r, confidence)."""
    if n_b < 100:
        raise ValueError("n_b must be at least 100")
    if not 50.0 < confidence < 100.0:
        raise ValueError("confidence must lie in (50, 100) percent")
    shots = data.shots
    if shots.sum() == 0:
        raise DataError("experiment data has no shots")
    r = _streamed_replicates(data.heavy, shots, n_b, rng or RngHandle(0))
    h, lower = _lower_from_replicates(data.heavy, shots, r, confidence)
    return CiResult(
        method="bootstrap",
        h_hat=h,
        lower=lower,
        confidence=confidence,
        n_c=data.n_c,
        total_shots=int(shots.sum()),
        n_bootstrap=n_b,
        bootstrap_mean=float(np.nanmean(r)),
        bootstrap_std=float(np.nanstd(r)),
        passed=lower > PASSING,
    )


def coverage_experiment(
    pool: Sequence[float],
    true_success: float,
    n_c: int,
    n_s: int,
    reps: int,
    method: CiMethod,
    rng: RngHandle,
    *,
    n_b: int = DEFAULT_BOOTSTRAPS,
    confidence: float = TWO_SIGMA,
) -> CoverageResult:
    """Fraction of simulated experiments whose lower bound is below the true success.

    Each experiment draws n_c circuits from ``pool`` (per-circuit heavy
    probabilities) with replacement and n_s binomial shots per circuit.
    """
    probs = np.asarray(pool, dtype=float)
    if probs.size == 0:
        raise ValueError("pool must not be empty")
    if n_c < 1 or n_s < 1 or reps < 1:
        raise ValueError("n_c, n_s and reps must be positive")
    g = rng.generator
    shots = np.full(n_c, n_s, dtype=np.int64)
    covered = 0
    widths = np.empty(reps)
    for i in range(reps):
        heavy = g.binomial(n_s, probs[g.integers(0, probs.size, size=n_c)])
        if method == "original":
            h, lower = _original_lower(heavy, shots)
        else:
            h, lower, _ = _bootstrap_lower(heavy, shots, n_b, confidence, g)
        covered += lower <= true_success
        widths[i] = h - lower
    return CoverageResult(
        method=method, coverage=covered / reps, mean_width=float(widths.mean()), reps=reps
    )


def passing_curve(
    data: ExperimentData,
    *,
    step: int = 1,
    min_prefix: int = 10,
    n_b: int = DEFAULT_BOOTSTRAPS,
    rng: Optional[RngHandle] = None,
) -> List[PassingPoint]:
    """Both lower bounds over growing prefixes of the circuit list."""
    if data.n_c < min_prefix:
        raise ValueError(f"passing curves need at least {min_prefix} circuits")
    g = (rng or RngHandle(0)).generator
    heavy, shots = data.heavy, data.shots
    curve = []
    for k in range(min_prefix, data.n_c + 1, step):
        _, lo_orig = _original_lower(heavy[:k], shots[:k])
        _, lo_boot, _ = _bootstrap_lower(heavy[:k], shots[:k], n_b, TWO_SIGMA, g)
        curve.append(PassingPoint(k, lo_orig, lo_boot))
    return curve


def crossing_prefix(curve: Sequence[PassingPoint], column: CiMethod) -> Optional[int]:
    """First prefix after which the chosen bound stays above 2/3, or None."""
    attr = "lower_original" if column == "original" else "lower_bootstrap"
    crossing = None
    for point in reversed(curve):
        if getattr(point, attr) <= PASSING:
            break
        crossing = point.n_c
    return crossing


def fit_width_scaling(n_c: Sequence[float], widths: Sequence[float]) -> Tuple[float, float]:
    """Least-squares fit width = a / sqrt(n_c); returns (a, relative residual)."""
    x = np.asarray(n_c, dtype=float)
    y = np.asarray(widths, dtype=float)
    (a,), _ = curve_fit(lambda n, a: a / np.sqrt(n), x, y, p0=[float(y[0] * math.sqrt(x[0]))])
    fitted = a / np.sqrt(x)
    return float(a), float(np.linalg.norm(y - fitted) / np.linalg.norm(y))


def estimate_circuit_fidelity(
    data: ExperimentData, n: int, h_ideal: Optional[float] = None
) -> FidelityEstimate:
    return circuit_fidelity_estimate(data.h_hat, h_ideal_haar(n) if h_ideal is None else h_ideal, n)
