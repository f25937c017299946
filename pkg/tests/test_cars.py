from __future__ import annotations

import json

import numpy as np
import pytest

from tdrr.cars import COLUMNS, load_bundled, read_source, write_csv
from tdrr.errors import InputError

UCI = """18.0   8   307.0      130.0      3504.      12.0   70  1\t"chevrolet chevelle malibu"
25.0   4   98.00      ?          2046.      19.0   71  1\t"ford pinto"
26.0   4   97.00      46.00      1835.      20.5   70  2\t"volkswagen 1131 deluxe sedan"
24.0   4   113.0      95.00      2372.      15.0   70  3\t"toyota corona mark ii"
"""


def test_uci_format(tmp_path):
    path = tmp_path / "auto-mpg.data"
    path.write_text(UCI, encoding="utf-8")
    data = read_source(path)
    assert data.shape == (3, 9)
    assert data[0].tolist() == [8, 307, 130, 3504, 12, 70, 1, 0, 18]
    assert data[1, 6:8].tolist() == [0, 1]
    assert data[2, 6:8].tolist() == [0, 0]


def test_vega_format(tmp_path):
    recs = [
        {"Name": "a", "Miles_per_Gallon": 18, "Cylinders": 8, "Displacement": 307, "Horsepower": 130,
         "Weight_in_lbs": 3504, "Acceleration": 12, "Year": "1970-01-01", "Origin": "USA"},
        {"Name": "b", "Miles_per_Gallon": None, "Cylinders": 4, "Displacement": 97, "Horsepower": 46,
         "Weight_in_lbs": 1835, "Acceleration": 20.5, "Year": "1970-01-01", "Origin": "Europe"},
    ]
    path = tmp_path / "cars.json"
    path.write_text(json.dumps(recs), encoding="utf-8")
    data = read_source(path)
    assert data.tolist() == [[8, 307, 130, 3504, 12, 70, 1, 0, 18]]


def test_empty_source(tmp_path):
    path = tmp_path / "empty.data"
    path.write_text("\n", encoding="utf-8")
    with pytest.raises(InputError):
        read_source(path)


def test_bundled_dataset_shape():
    X, y = load_bundled()
    assert X.shape == (392, 8)
    assert y.shape == (392,)
    # both origin indicators are binary and never both on
    assert set(np.unique(X[:, 6:8])) <= {0.0, 1.0}
    assert np.all(X[:, 6] + X[:, 7] <= 1.0)


def test_write_csv_round_trip():
    X, y = load_bundled()
    text = write_csv(np.column_stack([X, y]))
    assert text.splitlines()[0] == ",".join(COLUMNS)
    assert len(text.splitlines()) == 393
