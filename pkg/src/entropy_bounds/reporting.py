"""CSV rows for estimates (RFC 4180 quoting, CRLF line ends)."""

from __future__ import annotations

import csv
import io
from typing import Iterable, Sequence

import numpy as np


def fmt(value) -> str:
    """Deterministic text for a cell: shortest round-trip form for floats."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if np.isnan(v):
            return "nan"
        if np.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(value)


def to_csv(columns: Sequence[str], rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def write_csv(path, columns, rows):
    text = to_csv(columns, rows)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return text


def read_csv(path_or_text, is_text=False) -> list[dict]:
    if is_text:
        return list(csv.DictReader(io.StringIO(path_or_text)))
    with open(path_or_text, newline="") as fh:
        return list(csv.DictReader(fh))
