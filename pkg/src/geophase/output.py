"""Deterministic JSON/CSV writers with atomic replacement."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

SIG_DIGITS = 12


def fmt_float(x: float) -> str:
    if x is None or not math.isfinite(x):
        return "nan"
    if x == 0:
        return "0"
    return f"{x:.{SIG_DIGITS}g}"


def _encode(obj, indent: int, level: int, num=fmt_float) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return num(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}"{k}": {_encode(v, indent, level + 1, num)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(_is_scalar_or_pair(v) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1, num) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1, num) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(obj, "item"):
        return _encode(obj.item(), indent, level, num)
    raise TypeError(f"cannot encode {type(obj).__name__}")


def _is_scalar_or_pair(v) -> bool:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return True
    return isinstance(v, list) and len(v) == 2 and all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in v
    )


def dumps_report(obj: dict) -> str:
    """JSON text with insertion-ordered keys and 12 significant digits."""
    return _encode(obj, 2, 0) + "\n"


def dumps_exact(obj: dict) -> str:
    """Same layout as :func:`dumps_report` with round-trip float precision."""
    return _encode(obj, 2, 0, repr) + "\n"


def csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_float(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def stage(path: str | os.PathLike, text: str) -> Path:
    """Write ``text`` to a temporary sibling of ``path``; return its name."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent)
    with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return Path(tmp)


def commit(staged: list[tuple[Path, str | os.PathLike]]) -> None:
    for tmp, target in staged:
        os.replace(tmp, target)


def discard(staged: list[tuple[Path, str | os.PathLike]]) -> None:
    for tmp, _ in staged:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass


def write_atomic(path: str | os.PathLike, text: str) -> None:
    commit([(stage(path, text), path)])
