from __future__ import annotations

from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from src.decompose import (
    approximate_su4,
    arb_angle_synthesize,
    cnot_synthesize,
    weyl_decompose,
)
from src.linalg import I2, SWAP
from src.model import (
    CompiledCircuit,
    GateKind,
    GateOp,
    QvtCircuit,
    Round,
    sq_gate,
)

_IDENTITY_ATOL = 1e-12


class OptLevel(str, Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"


class NativeGate(str, Enum):
    CNOT = "cnot"
    ARB_ANGLE = "arb_angle"


class TranspileConfig(BaseModel):
    """How a QVT circuit is lowered to native gates.

    low: three-CNOT synthesis per block, then single-qubit fusion.
    medium: repeated-pair combination first.
    high: medium plus block approximation within ``tol``; ``mirror`` also
    tries SWAP·U per block and relabels the outputs instead of routing.
    """

    model_config = ConfigDict(frozen=True)

    level: OptLevel = OptLevel.MEDIUM
    tol: float = 0.0
    mirror: bool = False
    native_two_qubit: NativeGate = NativeGate.CNOT
    gate_fidelity: Optional[float] = None

    @field_validator("tol", mode="after")
    @classmethod
    def tol_in_range(cls, v: float) -> float:
        if not 0.0 <= v <= 1.0:
            raise ValueError("tol must lie in [0, 1]")
        return v

    @field_validator("gate_fidelity", mode="after")
    @classmethod
    def gate_fidelity_in_range(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and not 0.0 < v <= 1.0:
            raise ValueError("gate_fidelity must lie in (0, 1]")
        return v

    @model_validator(mode="after")
    def mirror_needs_high(self) -> "TranspileConfig":
        if (
            self.mirror
            and self.level != OptLevel.HIGH
            and self.native_two_qubit == NativeGate.CNOT
        ):
            raise ValueError("mirror requires level high or the arb_angle native gate")
        return self


def _is_identity(m: np.ndarray) -> bool:
    return abs(np.trace(m)) / 2 >= 1.0 - _IDENTITY_ATOL


def pass_fuse_sq(gates: Sequence[GateOp]) -> List[GateOp]:
    """Merge runs of single-qubit gates on each qubit; drop identities."""
    pending: Dict[int, np.ndarray] = {}
    out: List[GateOp] = []

    def flush(q: int) -> None:
        m = pending.pop(q, None)
        if m is not None and not _is_identity(m):
            out.append(sq_gate(q, m))

    for gate in gates:
        if gate.kind == GateKind.SQ:
            q = gate.qubits[0]
            pending[q] = gate.matrix @ pending.get(q, I2)
            continue
        touched = sorted(pending) if gate.kind == GateKind.MEASURE_ALL else gate.qubits
        for q in touched:
            flush(q)
        out.append(gate)
    for q in sorted(pending):
        flush(q)
    return out


def pass_block_combine(circuit: QvtCircuit) -> QvtCircuit:
    """Multiply blocks of pairs repeated in consecutive rounds into one block.

    A repeated block moves back to the slot of the earlier block; in between
    nothing touches either qubit. Rounds left empty are dropped.
    """
    pairs_out: List[List[Tuple[int, int]]] = []
    blocks_out: List[List[np.ndarray]] = []
    prev: Dict[FrozenSet[int], Tuple[int, int]] = {}
    for r, rnd in enumerate(circuit.rounds):
        pairs_out.append([])
        blocks_out.append([])
        cur: Dict[FrozenSet[int], Tuple[int, int]] = {}
        for pair, block in zip(rnd.pairs, rnd.blocks):
            key = frozenset(pair)
            if key in prev:
                ri, pos = prev[key]
                if pairs_out[ri][pos] != tuple(pair):
                    block = SWAP @ block @ SWAP
                blocks_out[ri][pos] = block @ blocks_out[ri][pos]
                cur[key] = (ri, pos)
            else:
                cur[key] = (r, len(pairs_out[r]))
                pairs_out[r].append(tuple(pair))
                blocks_out[r].append(np.asarray(block))
        prev = cur
    rounds = tuple(
        Round(pairs=tuple(p), blocks=tuple(b), idle=rnd.idle)
        for p, b, rnd in zip(pairs_out, blocks_out, circuit.rounds)
        if p
    )
    return QvtCircuit(width=circuit.width, seed=circuit.seed, rounds=rounds, combined=True)


def synthesize_block(block: np.ndarray, cfg: TranspileConfig) -> Tuple[CompiledCircuit, float]:
    """Two-qubit fragment for one block and its average fidelity to the block."""
    if cfg.native_two_qubit == NativeGate.ARB_ANGLE:
        frag, _ = arb_angle_synthesize(block, mirror=cfg.mirror)
        return frag, 1.0
    if cfg.level == OptLevel.HIGH:
        res = approximate_su4(block, cfg.tol, cfg.mirror, gate_fidelity=cfg.gate_fidelity)
        return res.circuit, res.avg_fidelity
    return cnot_synthesize(weyl_decompose(block)), 1.0


def _place(fragment: CompiledCircuit, physical: Tuple[int, int]) -> List[GateOp]:
    return [
        g.model_copy(update={"qubits": tuple(physical[q] for q in g.qubits)})
        for g in fragment.gates
    ]


def transpile(circuit: QvtCircuit, cfg: TranspileConfig) -> CompiledCircuit:
    n = circuit.width
    work = circuit if cfg.level == OptLevel.LOW else pass_block_combine(circuit)
    # loc[logical] = physical qubit currently holding it
    loc = list(range(n))
    gates: List[GateOp] = []
    for rnd in work.rounds:
        for (a, b), block in zip(rnd.pairs, rnd.blocks):
            frag, _ = synthesize_block(block, cfg)
            gates.extend(_place(frag, (loc[a], loc[b])))
            if frag.output_relabeling == (1, 0):
                loc[a], loc[b] = loc[b], loc[a]
    gates = pass_fuse_sq(gates)
    gates.append(GateOp(kind=GateKind.MEASURE_ALL, qubits=tuple(range(n))))
    return CompiledCircuit(
        width=n, source_seed=circuit.seed, relabel=tuple(loc), gates=tuple(gates)
    )


def block_fidelities(circuit: QvtCircuit, cfg: TranspileConfig) -> List[float]:
    """Per-block approximation fidelities transpile would accept."""
    work = circuit if cfg.level == OptLevel.LOW else pass_block_combine(circuit)
    return [synthesize_block(b, cfg)[1] for rnd in work.rounds for b in rnd.blocks]
