"""Small dense linear-algebra helpers shared by the circuit, synthesis and
simulation modules.

Conventions used throughout the package:

- Qubit 0 is the least-significant bit of a register index.
- A k-qubit operator acting on ``qubits = (q0, q1, ...)`` is written in the
  local basis whose index is ``sum(bit(q_j) << j)``; for two qubits this is
  ``np.kron(op_on_q1, op_on_q0)``.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

I2 = np.eye(2, dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
S = np.diag([1, 1j]).astype(np.complex128)

XX = np.kron(X, X)
YY = np.kron(Y, Y)
ZZ = np.kron(Z, Z)

# control on local qubit 0, target on local qubit 1
CNOT = np.array(
    [[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=np.complex128
)
SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.complex128
)

UNITARY_ATOL = 1e-10


def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)]).astype(np.complex128)


def pauli_rotation(pauli: np.ndarray, theta: float) -> np.ndarray:
    """exp(-i theta P / 2) for an involutory Pauli string matrix P."""
    eye = np.eye(pauli.shape[0], dtype=np.complex128)
    return np.cos(theta / 2) * eye - 1j * np.sin(theta / 2) * pauli


def interaction(theta: Sequence[float]) -> np.ndarray:
    """Two-qubit core exp[-i (tx XX + ty YY + tz ZZ) / 2].

    The three Pauli products commute, so the core is a plain product.
    """
    tx, ty, tz = theta
    return pauli_rotation(XX, tx) @ pauli_rotation(YY, ty) @ pauli_rotation(ZZ, tz)


def unitarity_error(m: np.ndarray) -> float:
    """Operator-norm distance of M†M from the identity."""
    eye = np.eye(m.shape[0])
    return float(np.linalg.norm(m.conj().T @ m - eye, ord=2))


def is_unitary(m: np.ndarray, atol: float = UNITARY_ATOL) -> bool:
    return m.ndim == 2 and m.shape[0] == m.shape[1] and unitarity_error(m) <= atol


def trace_overlap(u: np.ndarray, v: np.ndarray) -> float:
    """|Tr(U†V)| / d, the phase-insensitive overlap of two unitaries."""
    return float(abs(np.vdot(u, v)) / u.shape[0])


def average_gate_fidelity(u: np.ndarray, v: np.ndarray) -> float:
    """(|Tr(U†V)|² + d) / (d² + d)."""
    d = u.shape[0]
    tr = abs(np.vdot(u, v))
    return float((tr**2 + d) / (d * d + d))


def apply_matrix(
    state: np.ndarray, mat: np.ndarray, qubits: Sequence[int], width: int
) -> np.ndarray:
    """Apply a k-qubit operator to the leading register axis of ``state``.

    ``state`` has shape ``(2**width,)`` or ``(2**width, m)``; trailing axes are
    carried along untouched, which lets the same routine build dense unitaries
    and act on the rows of a density matrix.
    """
    k = len(qubits)
    extra = state.shape[1:]
    psi = state.reshape((2,) * width + extra)
    axes = [width - 1 - q for q in reversed(qubits)]
    op = mat.reshape((2,) * (2 * k))
    psi = np.tensordot(op, psi, axes=(list(range(k, 2 * k)), axes))
    psi = np.moveaxis(psi, list(range(k)), axes)
    return psi.reshape(state.shape)


def conjugate_density(
    rho: np.ndarray, mat: np.ndarray, qubits: Sequence[int], width: int
) -> np.ndarray:
    """U ρ U† with U acting on ``qubits`` only."""
    left = apply_matrix(rho, mat, qubits, width)
    # U (Uρ)† = U ρ† U†; the outer dagger gives U ρ U†
    return apply_matrix(left.conj().T, mat, qubits, width).conj().T


def qubit_signs(qubit: int, width: int) -> np.ndarray:
    """(-1)**bit(q) for every register index; the diagonal of Z_q."""
    idx = np.arange(2**width)
    return 1.0 - 2.0 * ((idx >> qubit) & 1)


def permutation_targets(relabeling: Sequence[int]) -> np.ndarray:
    """New logical index for each physical register index.

    ``relabeling[q]`` is the physical qubit that holds logical qubit ``q``.
    """
    width = len(relabeling)
    idx = np.arange(2**width)
    out = np.zeros_like(idx)
    for logical, physical in enumerate(relabeling):
        out |= ((idx >> physical) & 1) << logical
    return out
