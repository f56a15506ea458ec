from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, List, Type, TypeVar, Union

from pydantic import BaseModel, ValidationError

from src.errors import DataError
from src.parsers._io import FileLike, PathLike, ensure_path
from src.records import HeavyCountRecord, SimulationRecord

RecordT = TypeVar("RecordT", bound=BaseModel)


def _load_lines(source: Union[PathLike, FileLike], model: Type[RecordT]) -> List[RecordT]:
    opened, fp = ensure_path(source)
    items: List[RecordT] = []
    try:
        for line_no, line in enumerate(fp, start=1):
            s = line.strip()
            if not s:
                continue
            try:
                raw = json.loads(s)
            except json.JSONDecodeError as e:
                raise DataError(f"invalid JSON on line {line_no}: {e}") from e
            try:
                items.append(model.model_validate(raw))
            except ValidationError as e:
                raise DataError(f"invalid record on line {line_no}: {e}") from e
        return items
    finally:
        if opened is not None:
            opened.close()


def load_heavy_counts(source: Union[PathLike, FileLike]) -> List[HeavyCountRecord]:
    """Load experiment data: one {"circuit_seed","heavy_count","shots"} per line."""
    return _load_lines(source, HeavyCountRecord)


def load_simulation_records(source: Union[PathLike, FileLike]) -> List[SimulationRecord]:
    return _load_lines(source, SimulationRecord)


def append_jsonl(path: PathLike, records: Iterable[BaseModel]) -> int:
    """Append records to a JSONL file, one compact object per line."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(out, "a", encoding="utf-8") as f:  # noqa: PTH123
        for rec in records:
            f.write(rec.model_dump_json() + "\n")
            count += 1
    return count
