"""CSV and manifest serialization.

Floats are written with 9 significant digits so that reruns produce
byte-identical files.
"""
from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np


def fmt(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".9g")
    return str(value)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(x) for x in row])
    return buf.getvalue()


def columns_csv(columns: Mapping[str, np.ndarray]) -> str:
    """CSV from equal-length columns; column order follows the mapping."""
    header = list(columns)
    arrays = [np.asarray(columns[h]) for h in header]
    return csv_text(header, zip(*(a.tolist() for a in arrays)))


def read_columns(text: str) -> dict[str, list[str]]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    cols: dict[str, list[str]] = {h: [] for h in header}
    for row in reader:
        for h, cell in zip(header, row):
            cols[h].append(cell)
    return cols


def manifest_text(entries: Mapping[str, Any]) -> str:
    return "".join(f"{key} = {fmt(value)}\n" for key, value in entries.items())


def read_manifest(text: str) -> dict[str, str]:
    out = {}
    for line in text.splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path
