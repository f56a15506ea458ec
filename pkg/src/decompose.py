"""Two-qubit gate decomposition and synthesis.

Every 4x4 unitary is written as

    U = e^{iφ} (K1 ⊗ K2) · exp[-i(θx XX + θy YY + θz ZZ)/2] · (K3 ⊗ K4)

with the interaction coordinates in the chamber π/2 ≥ θx ≥ θy ≥ |θz|.
``np.kron(K1, K2)`` puts K1 on local qubit 1 and K2 on local qubit 0.

Synthesis fragments are two-qubit ``CompiledCircuit`` objects on register
qubits (0, 1); a mirrored fragment implements SWAP·U and carries the
relabeling (1, 0).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from src.errors import DataError, NumericError
from src.linalg import (
    SWAP,
    H,
    I2,
    S,
    X,
    XX,
    Y,
    YY,
    Z,
    ZZ,
    interaction,
    is_unitary,
    rx,
    ry,
    rz,
)
from src.model import (
    CompiledCircuit,
    GateKind,
    GateOp,
    cnot_gate,
    rotation_gate,
    sq_gate,
)

Theta = Tuple[float, float, float]

HALF_PI = np.pi / 2
_CHAMBER_ATOL = 1e-9
_DIAG_TRIES = 100
_DIAG_SEED = 20_231_017
_IDENTITY_ANGLE = 1e-12

MAGIC = np.array(
    [[1, 0, 0, 1j], [0, 1j, 1, 0], [0, 1j, -1, 0], [1, 0, 0, -1j]], dtype=np.complex128
) / np.sqrt(2)
MAGIC_DAG = MAGIC.conj().T

# phases of the magic-basis columns: phi_k = g + sum_j c_j * lambda_j[k]
_LAMBDA = np.column_stack(
    [np.ones(4)] + [np.real(np.diag(MAGIC_DAG @ p @ MAGIC)) for p in (XX, YY, ZZ)]
)

_PAULIS = (X, Y, Z)
_PAULI_PAIRS = (XX, YY, ZZ)
_AXIS_SWAPPERS: Dict[frozenset, np.ndarray] = {
    frozenset((0, 1)): S,
    frozenset((0, 2)): H,
    frozenset((1, 2)): rx(HALF_PI),
}


@dataclass(frozen=True)
class WeylDecomposition:
    k1: np.ndarray
    k2: np.ndarray
    k3: np.ndarray
    k4: np.ndarray
    theta: Theta
    global_phase: float = 0.0

    @property
    def theta_total(self) -> float:
        return theta_total(self.theta)

    def unitary(self) -> np.ndarray:
        core = interaction(self.theta)
        return np.exp(1j * self.global_phase) * (
            np.kron(self.k1, self.k2) @ core @ np.kron(self.k3, self.k4)
        )


@dataclass(frozen=True)
class ApproxResult:
    circuit: CompiledCircuit
    cnot_count: int
    avg_fidelity: float
    mirrored: bool


def theta_total(theta: Sequence[float]) -> float:
    return float(sum(abs(t) for t in theta))


def kron_factor_4x4_to_2x2s(matrix: np.ndarray) -> Tuple[complex, np.ndarray, np.ndarray]:
    """Split ``g * kron(f1, f2)`` into the scalar and two SU(2) factors."""
    # anchor on the largest entry
    a, b = max(((i, j) for i in range(4) for j in range(4)), key=lambda t: abs(matrix[t]))
    f1 = np.zeros((2, 2), dtype=np.complex128)
    f2 = np.zeros((2, 2), dtype=np.complex128)
    for i in range(2):
        for j in range(2):
            f1[(a >> 1) ^ i, (b >> 1) ^ j] = matrix[a ^ (i << 1), b ^ (j << 1)]
            f2[(a & 1) ^ i, (b & 1) ^ j] = matrix[a ^ i, b ^ j]
    with np.errstate(divide="ignore", invalid="ignore"):
        f1 /= np.sqrt(np.linalg.det(f1)) or 1
        f2 /= np.sqrt(np.linalg.det(f2)) or 1
    g = matrix[a, b] / (f1[a >> 1, b >> 1] * f2[a & 1, b & 1])
    if np.real(g) < 0:
        f1 *= -1
        g = -g
    return g, f1, f2


def _raw_weyl(u: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (left, theta, right) with U ∝ left · core(theta) · right.

    left/right are local 4x4 matrices; theta is not yet canonical.
    """
    us = u / np.linalg.det(u) ** 0.25
    up = MAGIC_DAG @ us @ MAGIC
    m2 = up.T @ up
    # Re(m2) and Im(m2) commute, so a generic real combination shares
    # the eigenbasis of m2.
    rng = np.random.default_rng(_DIAG_SEED)
    for _ in range(_DIAG_TRIES):
        a, b = rng.normal(size=2)
        _, p = np.linalg.eigh(a * m2.real + b * m2.imag)
        d = p.T @ m2 @ p
        if np.allclose(d, np.diag(np.diag(d)), atol=1e-9):
            break
    else:
        raise NumericError("could not diagonalize the two-qubit gate in the magic basis")
    if np.linalg.det(p) < 0:
        p[:, 0] *= -1
    phases = np.angle(np.diag(d)) / 2
    k1m = up @ p @ np.diag(np.exp(-1j * phases))
    if np.real(np.linalg.det(k1m)) < 0:
        phases[0] += np.pi
        k1m[:, 0] *= -1
    coeffs = np.linalg.solve(_LAMBDA, phases)
    left = MAGIC @ k1m @ MAGIC_DAG
    right = MAGIC @ p.T @ MAGIC_DAG
    return left, -2 * coeffs[1:], right


class _Chamber:
    """Moves interaction coordinates into the canonical chamber.

    With ``track`` set, keeps local matrices so that
    core(theta_in) = left · core(theta_out) · right.
    """

    def __init__(self, theta: Sequence[float], *, track: bool) -> None:
        self.theta = [float(t) for t in theta]
        self.track = track
        self.left = np.eye(4, dtype=np.complex128)
        self.right = np.eye(4, dtype=np.complex128)

    def shift(self, j: int, k: int) -> None:
        self.theta[j] += k * np.pi
        if self.track and k % 2:
            self.right = _PAULI_PAIRS[j] @ self.right

    def negate(self, j: int, l: int) -> None:
        self.theta[j] = -self.theta[j]
        self.theta[l] = -self.theta[l]
        if self.track:
            v = np.kron(_PAULIS[3 - j - l], I2)
            self.left = self.left @ v
            self.right = v @ self.right

    def swap(self, j: int, l: int) -> None:
        self.theta[j], self.theta[l] = self.theta[l], self.theta[j]
        if self.track:
            w = _AXIS_SWAPPERS[frozenset((j, l))]
            ww = np.kron(w, w)
            self.left = self.left @ ww.conj().T
            self.right = ww @ self.right

    def _into_range(self, j: int) -> None:
        while self.theta[j] <= -HALF_PI:
            self.shift(j, 1)
        while self.theta[j] > HALF_PI:
            self.shift(j, -1)

    def canonicalize(self) -> "_Chamber":
        for j in range(3):
            self._into_range(j)
        for a, b in ((0, 1), (1, 2), (0, 1)):
            if abs(self.theta[a]) < abs(self.theta[b]):
                self.swap(a, b)
        if self.theta[0] < 0:
            self.negate(0, 2)
        if self.theta[1] < 0:
            self.negate(1, 2)
        self._into_range(2)
        # on the θx = π/2 face, (π/2, y, z) ~ (π/2, y, -z)
        if self.theta[0] > HALF_PI - _CHAMBER_ATOL and self.theta[2] < 0:
            self.shift(0, -1)
            self.negate(0, 2)
        return self


def canonical_coordinates(theta: Sequence[float]) -> Theta:
    t = _Chamber(theta, track=False).canonicalize().theta
    return (t[0], t[1], t[2])


def mirror_coordinates(theta: Sequence[float]) -> Theta:
    """Canonical coordinates of SWAP·U given those of U."""
    tx, ty, tz = theta
    return canonical_coordinates((HALF_PI - tx, HALF_PI - ty, -(HALF_PI - tz)))


def _check_unitary(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (4, 4) or not is_unitary(u, atol=1e-8):
        raise DataError("expected a 4x4 unitary matrix")
    return u


def weyl_coordinates(u: np.ndarray) -> Theta:
    """Canonical interaction coordinates without the local factors."""
    _, theta, _ = _raw_weyl(_check_unitary(u))
    return canonical_coordinates(theta)


def weyl_decompose(u: np.ndarray) -> WeylDecomposition:
    u = _check_unitary(u)
    left, theta, right = _raw_weyl(u)
    chamber = _Chamber(theta, track=True).canonicalize()
    _, k1, k2 = kron_factor_4x4_to_2x2s(left @ chamber.left)
    _, k3, k4 = kron_factor_4x4_to_2x2s(chamber.right @ right)
    t = chamber.theta
    dec = WeylDecomposition(k1, k2, k3, k4, (t[0], t[1], t[2]))
    phase = float(np.angle(np.vdot(dec.unitary(), u)))
    return WeylDecomposition(k1, k2, k3, k4, dec.theta, phase)


def core_overlap(delta: Sequence[float]) -> float:
    """|Tr core(delta)|, the best local overlap between two interaction points."""
    c = np.cos(np.asarray(delta, dtype=float) / 2)
    s = np.sin(np.asarray(delta, dtype=float) / 2)
    return float(4 * abs(c[0] * c[1] * c[2] + 1j * s[0] * s[1] * s[2]))


def _k_cnot_target(theta: Sequence[float], k: int) -> Theta:
    if k == 0:
        return (0.0, 0.0, 0.0)
    if k == 1:
        return (HALF_PI, 0.0, 0.0)
    if k == 2:
        return (theta[0], theta[1], 0.0)
    if k == 3:
        return (theta[0], theta[1], theta[2])
    raise ValueError("cnot count must be 0, 1, 2 or 3")


def k_cnot_fidelity(theta: Sequence[float], k: int) -> float:
    """Average gate fidelity of the best k-CNOT circuit for canonical theta."""
    target = _k_cnot_target(theta, k)
    tr = core_overlap([a - b for a, b in zip(theta, target)])
    return (tr * tr + 4) / 20


def _fragment(gates: List[GateOp], mirrored: bool) -> CompiledCircuit:
    return CompiledCircuit(width=2, relabel=(1, 0) if mirrored else (0, 1), gates=tuple(gates))


def _zero_cnot_gates(dec: WeylDecomposition) -> List[GateOp]:
    return [sq_gate(0, dec.k2 @ dec.k4), sq_gate(1, dec.k1 @ dec.k3)]


def _one_cnot_gates(dec: WeylDecomposition) -> List[GateOp]:
    # core(π/2, 0, 0) ∝ H_0 · CNOT(0→1) · (Rz_0(π/2) ⊗ Rx_1(π/2)) · H_0
    return [
        sq_gate(0, rz(HALF_PI) @ H @ dec.k4),
        sq_gate(1, rx(HALF_PI) @ dec.k3),
        cnot_gate(0, 1),
        sq_gate(0, dec.k2 @ H),
        sq_gate(1, dec.k1),
    ]


def _two_cnot_gates(dec: WeylDecomposition) -> List[GateOp]:
    # core(x, y, 0) = W · CNOT · (Rx_0(x) ⊗ Rz_1(y)) · CNOT · W†, W = Rx(π/2)⊗Rx(π/2)
    tx, ty, _ = dec.theta
    return [
        sq_gate(0, rx(-HALF_PI) @ dec.k4),
        sq_gate(1, rx(-HALF_PI) @ dec.k3),
        cnot_gate(0, 1),
        sq_gate(0, rx(tx)),
        sq_gate(1, rz(ty)),
        cnot_gate(0, 1),
        sq_gate(0, dec.k2 @ rx(HALF_PI)),
        sq_gate(1, dec.k1 @ rx(HALF_PI)),
    ]


def _three_cnot_gates(dec: WeylDecomposition) -> List[GateOp]:
    # core(θ) ∝ S_1 · T · S_0†, T = CX(1→0)·[Rz_0(a) Ry_1(b)]·CX(0→1)·Ry_1(c)·CX(1→0)
    tx, ty, tz = dec.theta
    a, b, c = tz - HALF_PI, HALF_PI - tx, ty - HALF_PI
    return [
        sq_gate(0, S.conj().T @ dec.k4),
        sq_gate(1, dec.k3),
        cnot_gate(1, 0),
        sq_gate(1, ry(c)),
        cnot_gate(0, 1),
        sq_gate(0, rz(a)),
        sq_gate(1, ry(b)),
        cnot_gate(1, 0),
        sq_gate(0, dec.k2),
        sq_gate(1, dec.k1 @ S),
    ]


_BUILDERS: Dict[int, Callable[[WeylDecomposition], List[GateOp]]] = {
    0: _zero_cnot_gates,
    1: _one_cnot_gates,
    2: _two_cnot_gates,
    3: _three_cnot_gates,
}


def cnot_synthesize(dec: WeylDecomposition) -> CompiledCircuit:
    """Exact three-CNOT circuit for a decomposed block (global phase dropped)."""
    return _fragment(_three_cnot_gates(dec), mirrored=False)


def cnot_candidate(u: np.ndarray, k: int, *, mirrored: bool = False) -> ApproxResult:
    """Best k-CNOT approximation of U (of SWAP·U when mirrored)."""
    target = SWAP @ np.asarray(u) if mirrored else u
    dec = weyl_decompose(target)
    return ApproxResult(
        circuit=_fragment(_BUILDERS[k](dec), mirrored),
        cnot_count=k,
        avg_fidelity=k_cnot_fidelity(dec.theta, k),
        mirrored=mirrored,
    )


def approximate_su4(
    u: np.ndarray,
    tol: float,
    mirror: bool = False,
    *,
    gate_fidelity: float | None = None,
) -> ApproxResult:
    """Fewest-CNOT circuit whose average fidelity to U is at least 1 - tol.

    Ties in CNOT count go to the higher fidelity, then to the non-mirrored
    candidate. With ``gate_fidelity`` set, the candidate maximizing
    fidelity * gate_fidelity**k is returned instead and ``tol`` is ignored.
    """
    if not 0.0 <= tol <= 1.0:
        raise ValueError("tol must lie in [0, 1]")
    decs = {False: weyl_decompose(u)}
    if mirror:
        decs[True] = weyl_decompose(SWAP @ np.asarray(u))
    # (k, mirrored, fidelity)
    cands = [
        (k, m, k_cnot_fidelity(dec.theta, k)) for m, dec in decs.items() for k in range(4)
    ]
    if gate_fidelity is None:
        ok = [c for c in cands if c[2] >= 1.0 - tol]
        k, m, fid = min(ok, key=lambda c: (c[0], -c[2], c[1]))
    else:
        if not 0.0 < gate_fidelity <= 1.0:
            raise ValueError("gate_fidelity must lie in (0, 1]")
        k, m, fid = max(cands, key=lambda c: (c[2] * gate_fidelity ** c[0], -c[0], not c[1]))
    return ApproxResult(
        circuit=_fragment(_BUILDERS[k](decs[m]), m),
        cnot_count=k,
        avg_fidelity=fid,
        mirrored=m,
    )


def arb_angle_synthesize(u: np.ndarray, mirror: bool = False) -> Tuple[CompiledCircuit, float]:
    """Exact synthesis with RXX/RYY/RZZ rotations; returns (fragment, θ_tot).

    With ``mirror`` the variant (U or SWAP·U) with the smaller total angle wins.
    """
    dec = weyl_decompose(u)
    mirrored = False
    if mirror:
        dec_m = weyl_decompose(SWAP @ np.asarray(u))
        if dec_m.theta_total < dec.theta_total:
            dec, mirrored = dec_m, True
    gates = [sq_gate(0, dec.k4), sq_gate(1, dec.k3)]
    for kind, angle in zip((GateKind.RXX, GateKind.RYY, GateKind.RZZ), dec.theta):
        if abs(angle) > _IDENTITY_ANGLE:
            gates.append(rotation_gate(kind, (0, 1), angle))
    gates += [sq_gate(0, dec.k2), sq_gate(1, dec.k1)]
    return _fragment(gates, mirrored), dec.theta_total


__all__ = [
    "ApproxResult",
    "WeylDecomposition",
    "approximate_su4",
    "arb_angle_synthesize",
    "canonical_coordinates",
    "cnot_candidate",
    "cnot_synthesize",
    "core_overlap",
    "k_cnot_fidelity",
    "kron_factor_4x4_to_2x2s",
    "mirror_coordinates",
    "theta_total",
    "weyl_coordinates",
    "weyl_decompose",
]
