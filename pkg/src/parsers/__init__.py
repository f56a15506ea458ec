from __future__ import annotations

from .circuit_json import (
    circuit_from_json,
    compiled_from_json,
    dump_circuit,
    load_any_circuit,
    load_circuit,
    load_compiled,
)
from .experiment_jsonl import append_jsonl, load_heavy_counts, load_simulation_records

__all__ = [
    "circuit_from_json",
    "compiled_from_json",
    "dump_circuit",
    "load_any_circuit",
    "load_circuit",
    "load_compiled",
    "append_jsonl",
    "load_heavy_counts",
    "load_simulation_records",
]
