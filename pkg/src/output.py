"""
output.py
CSV / JSON writers for result files.

Numbers are written in scientific notation with 12 significant digits,
missing values as empty CSV cells or JSON null. Output is a pure function of
the rows, so identical runs give byte-identical files.
"""

import csv
import json
import math
import os
import sys
from contextlib import contextmanager
from typing import Iterable, Sequence

import numpy as np

FORMATS = ("csv", "json")


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"refusing to write non-finite value {value!r}")
    return f"{value:.11e}"


def _json_ready(value):
    if isinstance(value, dict):
        return {k: _json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_ready(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


@contextmanager
def _open_target(path: str | None):
    if path is None:
        yield sys.stdout
        return
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        yield handle


def write_table(rows: Iterable[dict], columns: Sequence[str], fmt: str = "csv",
                path: str | None = None) -> None:
    """Write rows (dicts keyed by column) with exactly one header line."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    rows = list(rows)
    with _open_target(path) as handle:
        if fmt == "csv":
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([format_cell(row.get(c)) for c in columns])
        else:
            records = [{c: _json_ready(row.get(c)) for c in columns} for row in rows]
            json.dump(records, handle, indent=2, allow_nan=False)
            handle.write("\n")


def write_object(obj: dict, path: str | None = None) -> None:
    """Write one JSON object."""
    with _open_target(path) as handle:
        json.dump(_json_ready(obj), handle, indent=2, allow_nan=False)
        handle.write("\n")
