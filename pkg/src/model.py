from __future__ import annotations

import math
from enum import Enum
from typing import Annotated, Any, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PlainSerializer,
    PlainValidator,
    WithJsonSchema,
    field_validator,
    model_validator,
)
from scipy.linalg import polar

from src.errors import DataError
from src.linalg import (
    CNOT,
    UNITARY_ATOL,
    XX,
    YY,
    ZZ,
    apply_matrix,
    is_unitary,
    pauli_rotation,
    permutation_targets,
    unitarity_error,
)

MAX_DENSE_WIDTH = 10
REPROJECT_ATOL = 1e-8
SEED_LIMIT = 2**64


def _to_matrix(value: Any) -> np.ndarray:
    if isinstance(value, np.ndarray):
        arr = np.array(value, dtype=np.complex128)
    else:
        raw = np.asarray(value)
        if raw.ndim == 2 and raw.shape[1] == 2 and raw.shape[0] in (4, 16):
            # row-major [re, im] pairs as written by the JSON serializer
            pairs = raw.astype(np.float64)
            arr = pairs[:, 0] + 1j * pairs[:, 1]
            side = math.isqrt(arr.size)
            arr = arr.reshape(side, side)
        else:
            arr = np.array(raw, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] not in (2, 4):
        raise ValueError(f"matrix must be 2x2 or 4x4, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix entries must be finite")
    arr.setflags(write=False)
    return arr


def _dump_matrix(arr: np.ndarray) -> List[List[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(arr).reshape(-1)]


ComplexMatrix = Annotated[
    np.ndarray,
    PlainValidator(_to_matrix),
    PlainSerializer(_dump_matrix, return_type=list),
    WithJsonSchema(
        {
            "type": "array",
            "description": "row-major matrix entries as [re, im] pairs",
            "items": {
                "type": "array",
                "items": {"type": "number"},
                "minItems": 2,
                "maxItems": 2,
            },
        }
    ),
]


class GateKind(str, Enum):
    SQ = "sq"
    CNOT = "cnot"
    RXX = "rxx"
    RYY = "ryy"
    RZZ = "rzz"
    MEASURE_ALL = "measure_all"


ROTATION_KINDS = {GateKind.RXX, GateKind.RYY, GateKind.RZZ}
TWO_QUBIT_KINDS = ROTATION_KINDS | {GateKind.CNOT}
_ROTATION_GENERATORS = {GateKind.RXX: XX, GateKind.RYY: YY, GateKind.RZZ: ZZ}


class GateOp(BaseModel):
    """One gate of a compiled circuit.

    Two-qubit matrices use the local basis ``bit(qubits[0]) + 2*bit(qubits[1])``;
    CNOT takes ``qubits = (control, target)``.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: GateKind
    qubits: Tuple[int, ...]
    theta: Optional[float] = None
    matrix: Optional[ComplexMatrix] = None

    @field_validator("qubits", mode="after")
    @classmethod
    def distinct_qubits(cls, v: Tuple[int, ...]) -> Tuple[int, ...]:
        if any(q < 0 for q in v):
            raise ValueError("qubit indices must be non-negative")
        if len(set(v)) != len(v):
            raise ValueError("gate qubits must be distinct")
        return v

    @model_validator(mode="after")
    def kind_matches_payload(self) -> "GateOp":
        if self.kind == GateKind.SQ:
            if len(self.qubits) != 1:
                raise ValueError("sq gate acts on exactly one qubit")
            if self.matrix is None or self.matrix.shape != (2, 2):
                raise ValueError("sq gate requires a 2x2 matrix")
        elif self.kind in TWO_QUBIT_KINDS:
            if len(self.qubits) != 2:
                raise ValueError(f"{self.kind.value} gate acts on exactly two qubits")
            if self.kind in ROTATION_KINDS:
                if self.theta is None or not math.isfinite(self.theta):
                    raise ValueError(f"{self.kind.value} gate requires a finite theta")
        return self

    def local_matrix(self) -> np.ndarray:
        if self.kind == GateKind.SQ:
            return self.matrix  # type: ignore[return-value]
        if self.kind == GateKind.CNOT:
            return CNOT
        if self.kind in ROTATION_KINDS:
            return pauli_rotation(_ROTATION_GENERATORS[self.kind], float(self.theta))
        raise DataError(f"gate kind {self.kind.value} has no unitary")

    @property
    def is_two_qubit(self) -> bool:
        return self.kind in TWO_QUBIT_KINDS


def sq_gate(qubit: int, matrix: np.ndarray) -> GateOp:
    return GateOp(kind=GateKind.SQ, qubits=(qubit,), matrix=matrix)


def cnot_gate(control: int, target: int) -> GateOp:
    return GateOp(kind=GateKind.CNOT, qubits=(control, target))


def rotation_gate(kind: GateKind, qubits: Tuple[int, int], theta: float) -> GateOp:
    return GateOp(kind=kind, qubits=qubits, theta=float(theta))


class Round(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    pairs: Tuple[Tuple[int, int], ...]
    blocks: Tuple[ComplexMatrix, ...]
    idle: Optional[int] = None

    @property
    def arrangement(self) -> Tuple[Tuple[int, int], ...]:
        return self.pairs


def _check_seed(v: int) -> int:
    if not 0 <= v < SEED_LIMIT:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return v


class QvtCircuit(BaseModel):
    """Logical QVT circuit: N rounds of pairings, one 4x4 block per pair.

    ``combined`` marks circuits produced by block combination, whose rounds
    may hold fewer than ⌊N/2⌋ pairs.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    width: int
    seed: int = 0
    rounds: Tuple[Round, ...]
    combined: bool = False

    @field_validator("width", mode="after")
    @classmethod
    def positive_width(cls, v: int) -> int:
        if v < 1:
            raise ValueError("width must be positive")
        return v

    @field_validator("seed", mode="after")
    @classmethod
    def seed_range(cls, v: int) -> int:
        return _check_seed(v)

    @property
    def block_count(self) -> int:
        return sum(len(r.blocks) for r in self.rounds)

    def to_json(self) -> str:
        exclude = None if self.combined else {"combined"}
        return self.model_dump_json(exclude=exclude)


class CompiledCircuit(BaseModel):
    model_config = ConfigDict(
        frozen=True, arbitrary_types_allowed=True, populate_by_name=True
    )

    width: int
    source_seed: int = 0
    output_relabeling: Tuple[int, ...] = Field(alias="relabel")
    gates: Tuple[GateOp, ...] = ()

    @field_validator("width", mode="after")
    @classmethod
    def positive_width(cls, v: int) -> int:
        if v < 1:
            raise ValueError("width must be positive")
        return v

    @field_validator("source_seed", mode="after")
    @classmethod
    def seed_range(cls, v: int) -> int:
        return _check_seed(v)

    @property
    def two_qubit_count(self) -> int:
        return sum(1 for g in self.gates if g.is_two_qubit)

    @property
    def cnot_count(self) -> int:
        return sum(1 for g in self.gates if g.kind == GateKind.CNOT)

    @property
    def sq_count(self) -> int:
        return sum(1 for g in self.gates if g.kind == GateKind.SQ)

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, exclude_none=True)


AnyCircuit = Union[QvtCircuit, CompiledCircuit]


def identity_relabeling(width: int) -> Tuple[int, ...]:
    return tuple(range(width))


def empty_compiled(width: int, *, source_seed: int = 0) -> CompiledCircuit:
    return CompiledCircuit(
        width=width, source_seed=source_seed, relabel=identity_relabeling(width)
    )


def operations(circuit: AnyCircuit) -> Iterator[Tuple[Tuple[int, ...], np.ndarray]]:
    """Yield ``(qubits, local matrix)`` for every unitary step in time order."""
    if isinstance(circuit, QvtCircuit):
        for rnd in circuit.rounds:
            for pair, block in zip(rnd.pairs, rnd.blocks):
                yield tuple(pair), block
        return
    for gate in circuit.gates:
        if gate.kind == GateKind.MEASURE_ALL:
            continue
        yield gate.qubits, gate.local_matrix()


def relabel_matrix(u: np.ndarray, relabeling: Sequence[int]) -> np.ndarray:
    targets = permutation_targets(relabeling)
    out = np.empty_like(u)
    out[targets] = u
    return out


def relabel_distribution(probs: np.ndarray, relabeling: Sequence[int]) -> np.ndarray:
    targets = permutation_targets(relabeling)
    out = np.empty_like(probs)
    out[targets] = probs
    return out


def circuit_unitary(circuit: AnyCircuit) -> np.ndarray:
    """Dense 2^N x 2^N unitary of a circuit, output relabeling included."""
    n = circuit.width
    if n > MAX_DENSE_WIDTH:
        raise ValueError(f"width {n} too large for a dense unitary (max {MAX_DENSE_WIDTH})")
    u = np.eye(2**n, dtype=np.complex128)
    for qubits, mat in operations(circuit):
        if any(q >= n for q in qubits):
            raise DataError(f"gate on qubits {qubits} outside register of width {n}")
        u = apply_matrix(u, mat, qubits, n)
    if isinstance(circuit, CompiledCircuit):
        u = relabel_matrix(u, circuit.output_relabeling)
    return u


def concatenate(first: QvtCircuit, second: QvtCircuit) -> QvtCircuit:
    """Run ``first`` then ``second`` on the same register."""
    if first.width != second.width:
        raise ValueError("cannot concatenate circuits of different width")
    return QvtCircuit(
        width=first.width,
        seed=first.seed,
        rounds=first.rounds + second.rounds,
        combined=first.combined or second.combined,
    )


def reproject(m: np.ndarray, *, atol: float = REPROJECT_ATOL) -> np.ndarray:
    """Snap a nearly unitary matrix back onto the unitary group.

    Matrices already unitary to 1e-10 are returned untouched so that
    serialization round trips stay byte-stable.
    """
    err = unitarity_error(m)
    if err <= UNITARY_ATOL:
        return m
    if err > atol:
        raise DataError(f"matrix is not unitary (deviation {err:.3e})")
    u, _ = polar(np.asarray(m))
    u.setflags(write=False)
    return u


def _round_issues(idx: int, rnd: Round, n: int, combined: bool) -> List[str]:
    issues: List[str] = []
    tag = f"round {idx}"
    if len(rnd.blocks) != len(rnd.pairs):
        issues.append(f"{tag}: {len(rnd.blocks)} blocks for {len(rnd.pairs)} pairs")
    seen: set[int] = set()
    for a, b in rnd.pairs:
        for q in (a, b):
            if not 0 <= q < n:
                issues.append(f"{tag}: pair index {q} out of range")
        if a == b or a in seen or b in seen:
            issues.append(f"{tag}: pair not disjoint ({a}, {b})")
        seen.update((a, b))
    if not combined:
        if len(rnd.pairs) != n // 2:
            issues.append(f"{tag}: expected {n // 2} pairs, found {len(rnd.pairs)}")
        if n % 2 == 1:
            uncovered = set(range(n)) - seen
            if rnd.idle is None or len(seen) >= n:
                issues.append(f"{tag}: odd N requires one idle qubit")
            elif uncovered != {rnd.idle}:
                issues.append(f"{tag}: idle qubit {rnd.idle} is not the unpaired qubit")
        elif rnd.idle is not None:
            issues.append(f"{tag}: even N has no idle qubit")
    for j, block in enumerate(rnd.blocks):
        if block.shape != (4, 4):
            issues.append(f"{tag}: block {j} is not 4x4")
        elif not is_unitary(block):
            issues.append(f"{tag}: block {j} is not unitary")
    return issues


def validate(circuit: AnyCircuit) -> Union[bool, List[str]]:
    """Check every structural invariant of a circuit.

    Returns True when the circuit is well formed, otherwise the list of all
    violations found.
    """
    issues: List[str] = []
    n = circuit.width
    if isinstance(circuit, QvtCircuit):
        if n < 2:
            issues.append("width must be at least 2")
        if not circuit.combined and len(circuit.rounds) != n:
            issues.append(f"expected {n} rounds, found {len(circuit.rounds)}")
        for idx, rnd in enumerate(circuit.rounds):
            issues.extend(_round_issues(idx, rnd, n, circuit.combined))
    else:
        if sorted(circuit.output_relabeling) != list(range(n)):
            issues.append("output_relabeling is not a permutation of the register")
        for idx, gate in enumerate(circuit.gates):
            if any(q >= n for q in gate.qubits):
                issues.append(f"gate {idx}: qubit index out of range")
            if gate.kind == GateKind.SQ and not is_unitary(gate.matrix):
                issues.append(f"gate {idx}: sq matrix is not unitary")
    return True if not issues else issues
