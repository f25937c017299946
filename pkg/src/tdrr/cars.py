"""
Auto MPG ("cars") preprocessing recipe.

Accepts either the UCI ``auto-mpg.data`` file (whitespace separated, '?' for
missing horsepower) or the ``cars.json`` copy shipped with vega_datasets.
Rows with missing values are dropped (406 -> 392), origin becomes two
indicators (American, European) and mpg is the response.
"""

from __future__ import annotations

import csv
import io
import json
import shlex
from importlib import resources
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from .errors import InputError

__all__ = ["COLUMNS", "RESPONSE", "PREDICTORS", "read_source", "write_csv", "bundled_path", "load_bundled"]

PREDICTORS = (
    "cylinders",
    "displacement",
    "horsepower",
    "weight",
    "acceleration",
    "year",
    "origin_american",
    "origin_european",
)
RESPONSE = "mpg"
COLUMNS = PREDICTORS + (RESPONSE,)

_VEGA_ORIGIN = {"USA": 1, "Europe": 2, "Japan": 3}


def _row(cyl, disp, hp, weight, acc, year, origin, mpg) -> list[float]:
    origin = int(origin)
    return [
        float(cyl), float(disp), float(hp), float(weight), float(acc), float(year),
        1.0 if origin == 1 else 0.0,
        1.0 if origin == 2 else 0.0,
        float(mpg),
    ]


def _from_uci(text: str) -> list[list[float]]:
    rows = []
    for line in text.splitlines():
        if not line.strip():
            continue
        # eight numeric fields, then the quoted car name
        fields = shlex.split(line)[:8]
        if "?" in fields:
            continue
        mpg, cyl, disp, hp, weight, acc, year, origin = fields
        rows.append(_row(cyl, disp, hp, weight, acc, year, origin, mpg))
    return rows


def _from_vega(text: str) -> list[list[float]]:
    rows = []
    for rec in json.loads(text):
        keys = ("Cylinders", "Displacement", "Horsepower", "Weight_in_lbs", "Acceleration", "Year",
                "Origin", "Miles_per_Gallon")
        if any(rec.get(k) is None for k in keys):
            continue
        year = int(str(rec["Year"])[:4]) - 1900
        rows.append(_row(rec["Cylinders"], rec["Displacement"], rec["Horsepower"], rec["Weight_in_lbs"],
                         rec["Acceleration"], year, _VEGA_ORIGIN[rec["Origin"]], rec["Miles_per_Gallon"]))
    return rows


def read_source(path: str | Path) -> NDArray[np.float64]:
    """Parse a raw Auto MPG file into the 392 x 9 complete-case matrix."""
    text = Path(path).read_text(encoding="utf-8")
    rows = _from_vega(text) if text.lstrip().startswith("[") else _from_uci(text)
    if not rows:
        raise InputError(f"no complete Auto MPG records found in {path}")
    return np.asarray(rows)


def write_csv(data: NDArray[np.float64]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in data:
        writer.writerow([repr(float(v)) if not float(v).is_integer() else str(int(v)) for v in row])
    return buf.getvalue()


def bundled_path() -> Path:
    return Path(str(resources.files("tdrr") / "data" / "cars.csv"))


def load_bundled() -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """(X, y) from the bundled preprocessed file: 392 x 8 predictors and mpg."""
    with open(bundled_path(), encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.asarray([[float(v) for v in row] for row in reader])
    if tuple(header) != COLUMNS:
        raise InputError("bundled cars file has an unexpected header")
    return data[:, :-1], data[:, -1]
