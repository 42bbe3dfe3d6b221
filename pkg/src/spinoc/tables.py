"""Plain CSV tables with fixed headers and byte-stable number formatting."""

from __future__ import annotations

import csv
import math
import os
from pathlib import Path

FLOAT_FMT = "%.12g"


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int,)) and not isinstance(value, bool):
        return str(value)
    if isinstance(value, str):
        return value
    x = float(value)
    if math.isnan(x):
        return "nan"
    if x == 0.0:
        return "0"  # no "-0"
    return FLOAT_FMT % x


def write_table(path, header, rows) -> Path:
    """Write atomically: a crash never leaves a half-written table behind."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])
    os.replace(tmp, path)
    return path


def append_row(path, header, row) -> None:
    path = Path(path)
    new = not path.exists()
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if new:
            w.writerow(header)
        w.writerow([fmt(v) for v in row])


def read_table(path) -> tuple[list[str], list[dict]]:
    with open(path, newline="") as fh:
        r = csv.DictReader(fh)
        rows = list(r)
        return list(r.fieldnames or []), rows


def column(path, name, dtype=float) -> list:
    _, rows = read_table(path)
    return [dtype(row[name]) for row in rows]
