"""Ideal statevector and noisy density-matrix simulation of compiled circuits.

Channel parameters are error probabilities: a depolarizing channel with
error ``p`` keeps the state with probability ``1 - p`` and otherwise
replaces the acted subsystem by the maximally mixed state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Annotated, Any, List, Optional, Sequence, Union

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    PlainSerializer,
    PlainValidator,
    WithJsonSchema,
    field_validator,
    model_validator,
)

from src.linalg import (
    ZZ,
    apply_matrix,
    conjugate_density,
    pauli_rotation,
    permutation_targets,
    qubit_signs,
)
from src.model import (
    AnyCircuit,
    CompiledCircuit,
    GateKind,
    operations,
    relabel_distribution,
)

MAX_STATEVECTOR_WIDTH = 20
MAX_DENSITY_WIDTH = 10
_NEGATIVE_ATOL = 1e-12
_NORM_ATOL = 1e-9


def _to_probs(value: Any) -> np.ndarray:
    arr = np.array(value, dtype=np.float64).reshape(-1)
    if np.any(arr < -_NEGATIVE_ATOL) or not np.all(np.isfinite(arr)):
        raise ValueError("probabilities must be finite and non-negative")
    arr = np.clip(arr, 0.0, None)
    if abs(arr.sum() - 1.0) > _NORM_ATOL:
        raise ValueError(f"probabilities sum to {arr.sum():.12f}, expected 1")
    arr.setflags(write=False)
    return arr


ProbVector = Annotated[
    np.ndarray,
    PlainValidator(_to_probs),
    PlainSerializer(lambda a: [float(x) for x in a], return_type=list),
    WithJsonSchema({"type": "array", "items": {"type": "number", "minimum": 0}}),
]


class NoiseSpec(BaseModel):
    """Concrete channel parameters for one density-matrix run."""

    model_config = ConfigDict(frozen=True)

    p_sq_dep: float = 0.0
    p_tq_dep: float = 0.0
    theta_zz: float = 0.0
    q_dephase: float = 0.0
    p_xtalk: float = 0.0
    e_meas: float = 0.0

    @field_validator("p_sq_dep", "p_tq_dep", "q_dephase", "p_xtalk", "e_meas", mode="after")
    @classmethod
    def probability(cls, v: float) -> float:
        if not (math.isfinite(v) and 0.0 <= v <= 1.0):
            raise ValueError("error probabilities must lie in [0, 1]")
        return v

    @field_validator("theta_zz", mode="after")
    @classmethod
    def finite_angle(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("theta_zz must be finite")
        return v

    @property
    def is_noiseless(self) -> bool:
        return not any(self.model_dump().values())


class OutputDistribution(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    width: int
    probs: ProbVector

    @model_validator(mode="after")
    def length_matches_width(self) -> "OutputDistribution":
        if self.probs.size != 2**self.width:
            raise ValueError(f"expected {2**self.width} probabilities, got {self.probs.size}")
        return self


@dataclass(frozen=True)
class Dep1:
    p: float


@dataclass(frozen=True)
class Dep2:
    p: float


@dataclass(frozen=True)
class Dephase:
    q: float


@dataclass(frozen=True)
class UnitaryChannel:
    matrix: np.ndarray


Channel = Union[Dep1, Dep2, Dephase, UnitaryChannel]


def _width_of(rho: np.ndarray) -> int:
    dim = rho.shape[0]
    width = dim.bit_length() - 1
    if rho.ndim != 2 or rho.shape != (dim, dim) or 2**width != dim:
        raise ValueError(f"density matrix has bad shape {rho.shape}")
    return width


def _depolarize(rho: np.ndarray, qubits: Sequence[int], p: float, width: int) -> np.ndarray:
    if p == 0.0:
        return rho
    k = len(qubits)
    d = 2**k
    rows = [width - 1 - q for q in reversed(qubits)]
    cols = [2 * width - 1 - q for q in reversed(qubits)]
    tail = list(range(2 * width - 2 * k, 2 * width))
    t = np.moveaxis(rho.reshape((2,) * (2 * width)), rows + cols, tail)
    rest = 2 ** (width - k)
    t = t.reshape(rest, rest, d, d)
    reduced = np.trace(t, axis1=2, axis2=3)
    mixed = reduced[:, :, None, None] * (np.eye(d) / d)
    mixed = np.moveaxis(mixed.reshape((2,) * (2 * width)), tail, rows + cols)
    return (1.0 - p) * rho + p * mixed.reshape(rho.shape)


def _dephase(rho: np.ndarray, qubit: int, q: float, width: int) -> np.ndarray:
    if q == 0.0:
        return rho
    s = qubit_signs(qubit, width)
    return rho * ((1.0 - q) + q * np.outer(s, s))


def apply_channel(rho: np.ndarray, channel: Channel, qubits: Sequence[int]) -> np.ndarray:
    width = _width_of(rho)
    if any(not 0 <= q < width for q in qubits):
        raise ValueError(f"qubits {tuple(qubits)} outside register of width {width}")
    if isinstance(channel, Dep1):
        if len(qubits) != 1:
            raise ValueError("dep1 acts on one qubit")
        return _depolarize(rho, qubits, channel.p, width)
    if isinstance(channel, Dep2):
        if len(qubits) != 2:
            raise ValueError("dep2 acts on two qubits")
        return _depolarize(rho, qubits, channel.p, width)
    if isinstance(channel, Dephase):
        out = rho
        for q in qubits:
            out = _dephase(out, q, channel.q, width)
        return out
    mat = np.asarray(channel.matrix)
    if mat.shape != (2 ** len(qubits),) * 2:
        raise ValueError(f"{mat.shape} operator does not fit {len(qubits)} qubits")
    return conjugate_density(rho, mat, qubits, width)


def ideal_state(circuit: AnyCircuit) -> np.ndarray:
    """Output amplitudes in logical qubit order."""
    n = circuit.width
    if n > MAX_STATEVECTOR_WIDTH:
        raise ValueError(f"width {n} exceeds the statevector limit of {MAX_STATEVECTOR_WIDTH}")
    psi = np.zeros(2**n, dtype=np.complex128)
    psi[0] = 1.0
    for qubits, mat in operations(circuit):
        psi = apply_matrix(psi, mat, qubits, n)
    if isinstance(circuit, CompiledCircuit):
        psi = relabel_distribution(psi, circuit.output_relabeling)
    return psi


def _distribution(width: int, probs: np.ndarray) -> OutputDistribution:
    probs = np.clip(probs, 0.0, None)
    return OutputDistribution(width=width, probs=probs / probs.sum())


def statevector_run(circuit: AnyCircuit) -> OutputDistribution:
    psi = ideal_state(circuit)
    return _distribution(circuit.width, np.abs(psi) ** 2)


def _neighbors(qubits: Sequence[int], width: int) -> List[int]:
    lo, hi = min(qubits) - 1, max(qubits) + 1
    return [q for q in (lo, hi) if 0 <= q < width and q not in qubits]


def density_state(circuit: CompiledCircuit, noise: NoiseSpec) -> np.ndarray:
    """Density matrix after all gates, physical qubit order, before readout."""
    n = circuit.width
    if n > MAX_DENSITY_WIDTH:
        raise ValueError(f"width {n} exceeds the density-matrix limit of {MAX_DENSITY_WIDTH}")
    rho = np.zeros((2**n, 2**n), dtype=np.complex128)
    rho[0, 0] = 1.0
    coherent = pauli_rotation(ZZ, noise.theta_zz) if noise.theta_zz else None
    for gate in circuit.gates:
        if gate.kind == GateKind.MEASURE_ALL:
            continue
        qubits = gate.qubits
        if not gate.is_two_qubit:
            rho = conjugate_density(rho, gate.local_matrix(), qubits, n)
            rho = _depolarize(rho, qubits, noise.p_sq_dep, n)
            continue
        for q in qubits:
            rho = _dephase(rho, q, noise.q_dephase, n)
        rho = conjugate_density(rho, gate.local_matrix(), qubits, n)
        if coherent is not None:
            rho = conjugate_density(rho, coherent, qubits, n)
        rho = _depolarize(rho, qubits, noise.p_tq_dep, n)
        for q in _neighbors(qubits, n):
            rho = _depolarize(rho, (q,), noise.p_xtalk, n)
    return rho


def readout(probs: np.ndarray, width: int, e_meas: float) -> np.ndarray:
    """Symmetric per-qubit bit-flip confusion on a distribution."""
    if e_meas == 0.0:
        return probs
    t = probs.reshape((2,) * width)
    for axis in range(width):
        t = (1.0 - e_meas) * t + e_meas * np.flip(t, axis=axis)
    return t.reshape(-1)


def density_run(circuit: CompiledCircuit, noise: NoiseSpec) -> OutputDistribution:
    rho = density_state(circuit, noise)
    probs = readout(np.real(np.diag(rho)), circuit.width, noise.e_meas)
    probs = relabel_distribution(probs, circuit.output_relabeling)
    return _distribution(circuit.width, probs)


def output_state_fidelity(
    circuit: CompiledCircuit,
    noise: NoiseSpec,
    target: Optional[np.ndarray] = None,
) -> float:
    """<ψ|ρ|ψ> of the noisy state against the ideal one.

    ``target`` is a logical-order statevector (e.g. of the uncompiled
    circuit); by default the compiled circuit's own ideal output is used.
    """
    psi = ideal_state(circuit) if target is None else np.asarray(target)
    # back to physical order
    psi = psi[permutation_targets(circuit.output_relabeling)]
    rho = density_state(circuit, noise)
    return float(np.real(np.vdot(psi, rho @ psi)))
