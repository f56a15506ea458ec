from __future__ import annotations

from pathlib import Path
from typing import IO, Union

PathLike = Union[str, Path]
FileLike = IO[str]


def ensure_path(source: Union[PathLike, FileLike]) -> tuple[FileLike | None, FileLike]:
    """Return (handle to close or None, readable handle) for a path or an open file."""
    if hasattr(source, "read"):
        return None, source  # type: ignore[return-value]
    f = open(Path(source), "r", encoding="utf-8")  # noqa: PTH123
    return f, f
