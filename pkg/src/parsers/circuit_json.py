from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Union

from pydantic import ValidationError

from src.errors import DataError
from src.model import CompiledCircuit, GateKind, QvtCircuit, Round, reproject
from src.parsers._io import FileLike, PathLike, ensure_path


def _read_object(source: Union[PathLike, FileLike]) -> dict[str, Any]:
    opened, fp = ensure_path(source)
    try:
        try:
            obj = json.load(fp)
        except json.JSONDecodeError as e:
            raise DataError(f"invalid JSON: {e}") from e
    finally:
        if opened is not None:
            opened.close()
    if not isinstance(obj, dict):
        raise DataError("expected a JSON object")
    return obj


def _snap_circuit(circuit: QvtCircuit) -> QvtCircuit:
    rounds = tuple(
        Round(
            pairs=r.pairs,
            blocks=tuple(reproject(b) for b in r.blocks),
            idle=r.idle,
        )
        for r in circuit.rounds
    )
    return circuit.model_copy(update={"rounds": rounds})


def _snap_compiled(circuit: CompiledCircuit) -> CompiledCircuit:
    gates = tuple(
        g.model_copy(update={"matrix": reproject(g.matrix)})
        if g.kind == GateKind.SQ
        else g
        for g in circuit.gates
    )
    return circuit.model_copy(update={"gates": gates})


def parse_circuit(obj: dict[str, Any]) -> QvtCircuit:
    """Validate a circuit mapping; near-unitary blocks are re-projected."""
    try:
        circuit = QvtCircuit.model_validate(obj)
    except ValidationError as e:
        raise DataError(f"invalid circuit: {e}") from e
    return _snap_circuit(circuit)


def parse_compiled(obj: dict[str, Any]) -> CompiledCircuit:
    try:
        circuit = CompiledCircuit.model_validate(obj)
    except ValidationError as e:
        raise DataError(f"invalid compiled circuit: {e}") from e
    return _snap_compiled(circuit)


def circuit_from_json(text: str) -> QvtCircuit:
    try:
        return parse_circuit(json.loads(text))
    except json.JSONDecodeError as e:
        raise DataError(f"invalid JSON: {e}") from e


def compiled_from_json(text: str) -> CompiledCircuit:
    try:
        return parse_compiled(json.loads(text))
    except json.JSONDecodeError as e:
        raise DataError(f"invalid JSON: {e}") from e


def load_circuit(source: Union[PathLike, FileLike]) -> QvtCircuit:
    """Load one QvtCircuit from a JSON file path or an open text stream."""
    return parse_circuit(_read_object(source))


def load_compiled(source: Union[PathLike, FileLike]) -> CompiledCircuit:
    return parse_compiled(_read_object(source))


def dump_circuit(circuit: Union[QvtCircuit, CompiledCircuit], path: PathLike) -> Path:
    """Write a circuit as a single JSON document followed by a newline."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(circuit.to_json() + "\n", encoding="utf-8")
    return out


def load_any_circuit(source: Union[PathLike, FileLike]) -> Union[QvtCircuit, CompiledCircuit]:
    """Logical or compiled circuit, told apart by the ``gates`` key."""
    obj = _read_object(source)
    return parse_compiled(obj) if "gates" in obj else parse_circuit(obj)
