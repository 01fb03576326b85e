"""Deterministic file I/O helpers.

Everything written here is reproducible byte-for-byte: UTF-8, LF line
endings, floats at 12 significant digits, no timestamps.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

from .errors import ParseError, SchemaError

SIG_DIGITS = 12


def format_number(value: Any) -> str:
    """Format a scalar for CSV output: floats at 12 significant digits."""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        if value == int(value) and abs(value) < 1e15:
            return str(int(value))
        return f"{value:.{SIG_DIGITS}g}"
    return str(value)


def round_sig(value: float, digits: int = SIG_DIGITS) -> float:
    """Round a float to `digits` significant digits (for JSON output)."""
    if value == 0 or not math.isfinite(value):
        return value
    return float(f"{value:.{digits}g}")


def _round_tree(obj: Any) -> Any:
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, float):
        return round_sig(obj)
    if isinstance(obj, dict):
        return {k: _round_tree(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_tree(v) for v in obj]
    return obj


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    """Write a CSV with formatted numbers, UTF-8, LF endings."""
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(header))
    for row in rows:
        writer.writerow([format_number(v) for v in row])
    Path(path).write_text(buf.getvalue(), encoding="utf-8", newline="\n")


def write_json(path: str | Path, payload: dict) -> None:
    """Write deterministic JSON: sorted keys, rounded floats, LF ending."""
    text = json.dumps(_round_tree(payload), indent=2, sort_keys=True, allow_nan=False)
    Path(path).write_text(text + "\n", encoding="utf-8", newline="\n")


def read_csv_rows(path: str | Path, required: Sequence[str]) -> list[dict[str, str]]:
    """Read a CSV into dict rows, checking the header.

    Raises :class:`SchemaError` when a required column is missing and
    :class:`ParseError` (with the 1-based row number) on malformed rows.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    reader = csv.DictReader(_io.StringIO(text))
    if reader.fieldnames is None:
        raise ParseError(f"{path}: empty file, expected header {','.join(required)}")
    missing = [c for c in required if c not in reader.fieldnames]
    if missing:
        raise SchemaError(f"{path}: missing required column(s) {', '.join(missing)}")
    rows = []
    for i, row in enumerate(reader, start=2):
        if None in row or any(v is None for v in row.values()):
            raise ParseError(f"{path}: row {i}: wrong number of fields")
        rows.append(row)
    return rows


def parse_float_field(raw: str, path: str | Path, row_num: int, column: str) -> float:
    """Parse a float cell, raising ParseError with the row number on failure."""
    try:
        return float(raw)
    except ValueError as exc:
        raise ParseError(f"{path}: row {row_num}: column {column!r}: not a number: {raw!r}") from exc
