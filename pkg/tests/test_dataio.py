from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geplab import dataio, sweep
from geplab.sweep import Axis, Grid, SweepRecord


def records():
    grid = Grid((Axis("gamma", -0.6, 0.6, 4), Axis("t1", -1.2, 1.2, 4)))
    return sweep.sweep(grid, "classify", {"N": 12, "eps": 1e-3})


def expected_from_csv(rows):
    columns = []
    for r in rows:
        columns += [c for c in r if c not in columns]
    return [{c: dataio.as_csv_precision(r).get(c) for c in columns} for r in rows]


def test_flatten_complex_and_bool():
    assert dataio.flatten({"E": 1 + 2j, "ok": True, "n": 3}) == {"E_re": 1.0, "E_im": 2.0, "ok": 1, "n": 3}


def test_record_row_layout():
    row = dataio.record_row(SweepRecord(4, {"t1": 0.5}, {"lambda": 0.25}))
    assert list(row) == ["index", "t1", "lambda", "error"]
    assert row["error"] == ""
    bad = dataio.record_row(SweepRecord(5, {"t1": 2.0}, {}, "trivial", "no-edge-pair"))
    assert bad["error"] == "no-edge-pair"


def test_csv_header_and_line_endings():
    text = dataio.dumps_csv(dataio.records_to_rows(records()))
    header = text.split("\n", 1)[0].split(",")
    assert header[:3] == ["index", "gamma", "t1"]
    assert header[-1] == "error"
    assert "E_plus_re" in header and "E_plus_im" in header
    assert "\r" not in text and text.endswith("\n")


def test_csv_round_trip(tmp_path):
    rows = dataio.records_to_rows(records())
    path = tmp_path / "d.csv"
    dataio.write_rows(str(path), rows, "csv")
    back = dataio.read_rows(str(path))
    for got, want in zip(back, expected_from_csv(rows)):
        assert dataio.rows_equal(got, want)
    assert len(back) == len(rows)


def test_json_round_trip_exact(tmp_path):
    rows = dataio.records_to_rows(records())
    path = tmp_path / "d.json"
    dataio.write_rows(str(path), rows, "json")
    back = dataio.read_rows(str(path))
    assert back == rows


def test_infinity_survives_both_formats():
    rows = [{"beta_b": math.inf, "x": 1.5}]
    assert dataio.loads_json(dataio.dumps_json(rows))[0]["beta_b"] == math.inf
    assert dataio.loads_csv(dataio.dumps_csv(rows))[0]["beta_b"] == math.inf


def test_unknown_format():
    with pytest.raises(ValueError):
        dataio.dumps([], "xml")


@settings(max_examples=200)
@given(st.lists(st.floats(allow_nan=False, width=64), min_size=1, max_size=5))
def test_float_cells_round_trip_at_declared_precision(values):
    rows = [{"v": v} for v in values]
    back = dataio.loads_csv(dataio.dumps_csv(rows))
    for got, want in zip(back, rows):
        assert dataio.rows_equal(got, dataio.as_csv_precision(want))
