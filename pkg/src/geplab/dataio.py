"""CSV / JSON dataset files.

Rows are flat mappings.  Complex values are split into ``<name>_re`` and
``<name>_im`` columns in both formats.  CSV uses ``%.12g`` for floats, UTF-8
and LF line endings; JSON keeps full float precision.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import IO, Iterable, Mapping, Sequence

import numpy as np

from .sweep import SweepRecord

FLOAT_FORMAT = "%.12g"


def _flatten_value(name: str, value, out: dict) -> None:
    if isinstance(value, (complex, np.complexfloating)):
        out[f"{name}_re"] = float(value.real)
        out[f"{name}_im"] = float(value.imag)
    elif isinstance(value, (bool, np.bool_)):
        out[name] = int(value)
    elif isinstance(value, (int, np.integer)):
        out[name] = int(value)
    elif isinstance(value, (float, np.floating)):
        out[name] = float(value)
    else:
        out[name] = value


def flatten(mapping: Mapping) -> dict:
    out: dict = {}
    for k, v in mapping.items():
        _flatten_value(k, v, out)
    return out


def record_row(rec: SweepRecord) -> dict:
    row = {"index": rec.index}
    row.update(flatten(rec.params))
    row.update(flatten(rec.outputs))
    row["error"] = rec.reason or ""
    return row


def records_to_rows(records: Iterable[SweepRecord]) -> list[dict]:
    return [record_row(r) for r in records]


def _columns(rows: Sequence[Mapping]) -> list[str]:
    cols: list[str] = []
    seen = set()
    for row in rows:
        for k in row:
            if k not in seen:
                seen.add(k)
                cols.append(k)
    if "error" in seen:
        cols.remove("error")
        cols.append("error")
    return cols


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return FLOAT_FORMAT % value
    return str(value)


def dumps_csv(rows: Sequence[Mapping], columns: Sequence[str] | None = None) -> str:
    cols = list(columns) if columns is not None else _columns(rows)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for row in rows:
        writer.writerow([_format_cell(row.get(c)) for c in cols])
    return buf.getvalue()


def dumps_json(rows: Sequence[Mapping]) -> str:
    return json.dumps([dict(r) for r in rows], indent=1) + "\n"


def dumps(rows: Sequence[Mapping], fmt: str) -> str:
    if fmt == "csv":
        return dumps_csv(rows)
    if fmt == "json":
        return dumps_json(rows)
    raise ValueError(f"unknown format {fmt!r}")


def write_rows(path_or_file: str | IO[str], rows: Sequence[Mapping], fmt: str) -> None:
    text = dumps(rows, fmt)
    if isinstance(path_or_file, str):
        with open(path_or_file, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        path_or_file.write(text)


def _parse_cell(text: str):
    if text == "":
        return None
    try:
        value = float(text)
    except ValueError:
        return text
    if value.is_integer() and "." not in text and "e" not in text.lower() and "n" not in text.lower():
        return int(value)
    return value


def loads_csv(text: str) -> list[dict]:
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows:
        return []
    header, body = rows[0], rows[1:]
    return [{k: _parse_cell(v) for k, v in zip(header, line)} for line in body]


def loads_json(text: str) -> list[dict]:
    return json.loads(text)


def read_rows(path: str, fmt: str | None = None) -> list[dict]:
    fmt = fmt or ("json" if path.endswith(".json") else "csv")
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return loads_json(text) if fmt == "json" else loads_csv(text)


def as_csv_precision(row: Mapping) -> dict:
    """The row as it reads back from CSV: floats rounded through ``%.12g``."""
    out = {}
    for k, v in row.items():
        if isinstance(v, float):
            out[k] = float(FLOAT_FORMAT % v)
        elif v == "":
            out[k] = None
        else:
            out[k] = v
    return out


def rows_equal(a: Mapping, b: Mapping) -> bool:
    if set(a) != set(b):
        return False
    for k in a:
        x, y = a[k], b[k]
        if isinstance(x, float) and isinstance(y, (int, float)):
            if not (x == y or (math.isnan(x) and math.isnan(float(y)))):
                return False
        elif x != y:
            return False
    return True
