"""Expected two-qubit gate counts after combining repeated pairs.

Consecutive rounds that share a pair merge their two blocks into one, so a
QVT_N circuit needs fewer than 3*floor(N/2)*N CNOTs on average. The counts
below are exact integers; only the final expectation is a float.
"""

from __future__ import annotations

from functools import lru_cache
from math import comb, factorial
from typing import Iterator, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.sampling import (
    Arrangement,
    RngHandle,
    nearest_neighbor_arrangement,
    random_arrangement,
)


@lru_cache(maxsize=None)
def f_arrangements(n: int) -> int:
    """Number of arrangements (perfect matchings, one idle qubit for odd n)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    half = n // 2
    return factorial(n) // (2**half * factorial(half))


@lru_cache(maxsize=None)
def g_no_repeats(n: int) -> int:
    """Arrangements sharing no pair with a fixed reference arrangement."""
    if n < 0:
        raise ValueError("n must be non-negative")
    half = n // 2
    return sum((-1) ** k * comb(half, k) * f_arrangements(n - 2 * k) for k in range(half + 1))


def h_exact_repeats(n: int, m: int) -> int:
    """Arrangements sharing exactly m pairs with a fixed reference arrangement."""
    half = n // 2
    if not 0 <= m <= half:
        raise ValueError(f"m must lie in [0, {half}]")
    return comb(half, m) * g_no_repeats(n - 2 * m)


@lru_cache(maxsize=None)
def expected_tq_gates(n: int) -> float:
    if n < 2:
        raise ValueError("n must be at least 2")
    half = n // 2
    new_pairs = sum(h_exact_repeats(n, k) * (half - k) for k in range(half + 1))
    return 3 * half + 3 * (n - 1) * new_pairs / f_arrangements(n)


def expected_rounds(n: int) -> float:
    """Effective number of full rounds after combining (real valued)."""
    return expected_tq_gates(n) / (3 * (n // 2))


def savings_ratio(n: int) -> float:
    return expected_tq_gates(n) / (3 * (n // 2) * n)


def enumerate_arrangements(n: int) -> Iterator[Arrangement]:
    """Every arrangement of n qubits, by brute force."""

    def matchings(qubits: Tuple[int, ...]) -> Iterator[Tuple[Tuple[int, int], ...]]:
        if not qubits:
            yield ()
            return
        first, rest = qubits[0], qubits[1:]
        for i, partner in enumerate(rest):
            for tail in matchings(rest[:i] + rest[i + 1 :]):
                yield ((first, partner),) + tail

    everyone = tuple(range(n))
    if n % 2 == 0:
        for pairs in matchings(everyone):
            yield Arrangement(pairs, None)
        return
    for idle in everyone:
        for pairs in matchings(tuple(q for q in everyone if q != idle)):
            yield Arrangement(pairs, idle)


def shared_pairs(a: Arrangement, b: Arrangement) -> int:
    return len({frozenset(p) for p in a.pairs} & {frozenset(p) for p in b.pairs})


def sample_tq_count(n: int, rng: RngHandle, rounds: Optional[int] = None) -> int:
    """Two-qubit gates of one random arrangement sequence after combining."""
    rounds = n if rounds is None else rounds
    prev = nearest_neighbor_arrangement(n)
    blocks = len(prev.pairs)
    for _ in range(rounds - 1):
        cur = random_arrangement(n, rng)
        blocks += len(cur.pairs) - shared_pairs(prev, cur)
        prev = cur
    return 3 * blocks


def monte_carlo_savings(n: int, trials: int, rng: RngHandle) -> Tuple[float, float]:
    """Sample mean and standard deviation of the combined two-qubit gate count."""
    if trials < 1:
        raise ValueError("trials must be positive")
    counts = np.array([sample_tq_count(n, rng) for _ in range(trials)], dtype=float)
    std = float(counts.std(ddof=1)) if trials > 1 else 0.0
    return float(counts.mean()), std


class GateCountReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    f: int
    expected_tq: float
    expected_rounds: float
    savings_ratio: float
    mc_mean: Optional[float] = None
    std_dev: Optional[float] = None


def gate_count_report(n: int, trials: int = 0, rng: Optional[RngHandle] = None) -> GateCountReport:
    """Closed-form counts for n, plus Monte Carlo spread when trials > 0.

    ``std_dev`` is the per-circuit standard deviation of the savings ratio.
    """
    mc_mean = std = None
    if trials > 0:
        mean, spread = monte_carlo_savings(n, trials, rng or RngHandle(0))
        full = 3 * (n // 2) * n
        mc_mean, std = mean, spread / full
    return GateCountReport(
        n=n,
        f=f_arrangements(n),
        expected_tq=expected_tq_gates(n),
        expected_rounds=expected_rounds(n),
        savings_ratio=savings_ratio(n),
        mc_mean=mc_mean,
        std_dev=std,
    )


def savings_table(n_values: List[int], trials: int, rng: RngHandle) -> List[GateCountReport]:
    return [gate_count_report(n, trials, rng) for n in n_values]
