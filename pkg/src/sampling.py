from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Tuple

import numpy as np

from src.model import SEED_LIMIT, QvtCircuit, Round

Pair = Tuple[int, int]


def stable_key(*parts: object) -> int:
    """Deterministic 63-bit integer for a tuple of labels (model names, levels)."""
    s = "|".join(str(p) for p in parts)
    return int(hashlib.sha256(s.encode("utf-8")).hexdigest(), 16) % 2**63


@dataclass
class RngHandle:
    """Seeded random stream; the generator carries the stream position."""

    seed: int
    generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not 0 <= self.seed < SEED_LIMIT:
            raise ValueError("seed must be a 64-bit unsigned integer")
        self.generator = np.random.default_rng(self.seed)

    @classmethod
    def substream(cls, master: int, *keys: int) -> "RngHandle":
        """Independent handle for ``(master, *keys)``, e.g. (seed, n, circuit index)."""
        ss = np.random.SeedSequence([int(master), *(int(k) for k in keys)])
        return cls(int(ss.generate_state(1, dtype=np.uint64)[0]))


class Arrangement(NamedTuple):
    pairs: Tuple[Pair, ...]
    idle: Optional[int]


def haar_unitary(dim: int, rng: RngHandle) -> np.ndarray:
    """Haar-random U(dim) via QR of a complex Ginibre matrix.

    The columns of Q are rephased by diag(R)/|diag(R)| so the result does not
    inherit the sign convention of the QR routine.
    """
    g = rng.generator
    z = (g.standard_normal((dim, dim)) + 1j * g.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def haar_su4(rng: RngHandle) -> np.ndarray:
    return haar_unitary(4, rng)


def nearest_neighbor_arrangement(n: int) -> Arrangement:
    pairs = tuple((q, q + 1) for q in range(0, n - 1, 2))
    return Arrangement(pairs, n - 1 if n % 2 else None)


def random_arrangement(n: int, rng: RngHandle) -> Arrangement:
    """Uniform random perfect matching of n qubits (one idle qubit for odd n).

    The idle qubit is drawn first; the rest are matched by pairing the lowest
    unpaired qubit with a uniformly chosen remaining one.
    """
    if n < 2:
        raise ValueError("arrangements need at least two qubits")
    g = rng.generator
    remaining = list(range(n))
    idle = remaining.pop(int(g.integers(n))) if n % 2 else None
    pairs = []
    while remaining:
        first = remaining.pop(0)
        partner = remaining.pop(int(g.integers(len(remaining))))
        pairs.append((first, partner))
    return Arrangement(tuple(pairs), idle)


def generate_qvt_circuit(n: int, rng: RngHandle, *, depth: Optional[int] = None) -> QvtCircuit:
    """Sample a QVT_n circuit.

    The first round pairs nearest neighbours, later rounds use uniform random
    arrangements, and every pair gets an independent Haar block. ``depth``
    overrides the number of rounds (default n) for depth-scaling studies.
    """
    if n < 2:
        raise ValueError("QVT circuits need at least two qubits")
    depth = n if depth is None else depth
    if depth < 1:
        raise ValueError("depth must be positive")
    rounds = []
    for r in range(depth):
        arr = nearest_neighbor_arrangement(n) if r == 0 else random_arrangement(n, rng)
        blocks = tuple(haar_su4(rng) for _ in arr.pairs)
        rounds.append(Round(pairs=arr.pairs, blocks=blocks, idle=arr.idle))
    return QvtCircuit(width=n, seed=rng.seed, rounds=tuple(rounds))


def circuit_for_index(n: int, master_seed: int, index: int, *, depth: Optional[int] = None) -> QvtCircuit:
    """Circuit ``index`` of a reproducible family; independent of generation order."""
    return generate_qvt_circuit(n, RngHandle.substream(master_seed, n, index), depth=depth)
