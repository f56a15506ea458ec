"""Heavy-output analysis and ideal-distribution diagnostics.

Heavy outputs are defined per circuit: the outputs whose ideal probability
is strictly greater than the median of that circuit's 2^N probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy import stats

from src.simulate import OutputDistribution

ProbsLike = Union[OutputDistribution, np.ndarray, Sequence[float]]
LN2 = float(np.log(2.0))
ASYMPTOTIC_HEAVY = (1.0 + LN2) / 2


def _as_probs(dist: ProbsLike) -> np.ndarray:
    if isinstance(dist, OutputDistribution):
        return dist.probs
    return np.asarray(dist, dtype=float).reshape(-1)


class HeavyAnalysis(BaseModel):
    model_config = ConfigDict(frozen=True)

    median: float
    heavy_set: Tuple[int, ...]
    ideal_heavy_prob: float
    noisy_heavy_prob: Optional[float] = None

    def with_noisy(self, noisy: ProbsLike) -> "HeavyAnalysis":
        return self.model_copy(
            update={"noisy_heavy_prob": heavy_output_probability(noisy, self.heavy_set)}
        )


class DistributionDiagnostics(BaseModel):
    model_config = ConfigDict(frozen=True)

    ks_stat: float
    mean_entropy_bits: float
    central_moments: List[float] = []


def heavy_output_probability(dist: ProbsLike, heavy: Iterable[int]) -> float:
    probs = _as_probs(dist)
    idx = np.fromiter(heavy, dtype=np.int64)
    return float(probs[idx].sum()) if idx.size else 0.0


def heavy_set(ideal: ProbsLike) -> HeavyAnalysis:
    probs = _as_probs(ideal)
    median = float(np.median(probs))
    heavy = tuple(int(k) for k in np.flatnonzero(probs > median))
    return HeavyAnalysis(
        median=median,
        heavy_set=heavy,
        ideal_heavy_prob=heavy_output_probability(probs, heavy),
    )


def h_ideal_haar(n: int) -> float:
    """Expected heavy-output probability of a Haar-random N-qubit state."""
    if n < 1:
        raise ValueError("n must be positive")
    dim = 2.0**n
    prefactor = np.exp(-LN2 * dim / (dim - 1))
    return float(prefactor * (1 + dim * np.expm1(LN2 / (dim - 1))))


def haar_output_pdf(p: Union[float, np.ndarray], n: int) -> Union[float, np.ndarray]:
    """Density of one output probability of a Haar-random state."""
    dim = 2.0**n
    return (dim - 1) * np.power(1 - np.asarray(p, dtype=float), dim - 2)


def porter_thomas_pdf(p: Union[float, np.ndarray], n: int) -> Union[float, np.ndarray]:
    dim = 2.0**n
    return dim * np.exp(-np.asarray(p, dtype=float) * dim)


def haar_cdf(p: Union[float, np.ndarray], n: int) -> Union[float, np.ndarray]:
    dim = 2.0**n
    return 1 - np.power(1 - np.clip(np.asarray(p, dtype=float), 0, 1), dim - 1)


def ks_statistic(probabilities: Sequence[float], n: int) -> float:
    """Sup distance between the empirical CDF of the sample and the Haar CDF."""
    sample = np.asarray(probabilities, dtype=float).reshape(-1)
    if sample.size == 0:
        raise ValueError("ks_statistic needs a non-empty sample")
    return float(stats.kstest(sample, lambda x: haar_cdf(x, n)).statistic)


def binned_ks_statistic(probabilities: Sequence[float], n: int, bins: int = 100) -> float:
    """KS distance evaluated only at histogram bin edges on [0, max(sample)]."""
    sample = np.asarray(probabilities, dtype=float).reshape(-1)
    if sample.size == 0:
        raise ValueError("binned_ks_statistic needs a non-empty sample")
    upper = max(float(sample.max()), 1e-300)
    counts, edges = np.histogram(sample, bins=bins, range=(0.0, upper))
    empirical = np.concatenate([[0.0], np.cumsum(counts) / sample.size])
    return float(np.max(np.abs(empirical - haar_cdf(edges, n))))


def single_qubit_entropies(state: np.ndarray) -> np.ndarray:
    psi = np.asarray(state, dtype=np.complex128).reshape(-1)
    n = psi.size.bit_length() - 1
    t = psi.reshape((2,) * n)
    out = np.empty(n)
    for q in range(n):
        m = np.moveaxis(t, n - 1 - q, 0).reshape(2, -1)
        eig = np.clip(np.linalg.eigvalsh(m @ m.conj().T), 0.0, None)
        out[q] = stats.entropy(eig, base=2) if eig.sum() > 0 else 0.0
    return out


def mean_single_qubit_entropy(state: np.ndarray) -> float:
    """Average von Neumann entropy (bits) of the N single-qubit marginals."""
    return float(single_qubit_entropies(state).mean())


@dataclass(frozen=True)
class FidelityEstimate:
    value: float
    clamped: bool


def circuit_fidelity_estimate(h_hat: float, h_ideal: float, n: int) -> FidelityEstimate:
    """Average circuit fidelity implied by a measured heavy-output frequency.

    Assumes the noisy output is the ideal one mixed with the uniform
    distribution; the result is clamped to [2^-N, 1].
    """
    if h_ideal <= 0.5:
        raise ValueError("h_ideal must exceed 1/2")
    dim = 2.0**n
    raw = 1 - (dim - 1) / dim * (h_ideal - h_hat) / (h_ideal - 0.5)
    value = min(max(raw, 1 / dim), 1.0)
    return FidelityEstimate(float(value), bool(value != raw))


def distribution_moments(values: Sequence[float], orders: Iterable[int] = range(2, 7)) -> List[float]:
    """Central sample moments; odd orders keep their sign."""
    arr = np.asarray(values, dtype=float)
    if arr.size < 2:
        raise ValueError("moments need at least two values")
    return [float(stats.moment(arr, moment=k)) for k in orders]


def diagnostics(
    output_probs: Sequence[float],
    states: Sequence[np.ndarray],
    n: int,
    heavy_probs: Optional[Sequence[float]] = None,
) -> DistributionDiagnostics:
    """KS distance, mean marginal entropy and heavy-probability moments for a batch."""
    moments = distribution_moments(heavy_probs) if heavy_probs is not None else []
    return DistributionDiagnostics(
        ks_stat=ks_statistic(output_probs, n),
        mean_entropy_bits=float(np.mean([mean_single_qubit_entropy(s) for s in states])),
        central_moments=moments,
    )
