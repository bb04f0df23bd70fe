"""Tests for formatter.py: pure functions, easy to test.

Covers: table construction, float text, column labels, CSV layout,
JSON conversion of numpy values and non-finite floats.
"""

import json
import math

import numpy as np
import pytest

from spinmeter.core.formatter import (
    Table,
    column_label,
    format_float,
    format_summary,
    format_table,
    jsonable,
    parse_table,
)


# --- Table ---


def test_table_from_columns():
    t = Table.from_columns("demo", [("t", "1/delta_tilde", [0, 1, 2]), ("x", "", [3, 4, 5])])
    assert t.data.shape == (3, 2)
    assert list(t.column("x")) == [3.0, 4.0, 5.0]


def test_table_label_mismatch():
    with pytest.raises(ValueError):
        Table("bad", (("a", "1"),), np.zeros((3, 2)))


def test_table_unknown_column():
    t = Table.from_columns("demo", [("t", "1", [0.0])])
    with pytest.raises(KeyError):
        t.column("x")


# --- format_float ---


def test_float_round_trips():
    for v in (0.1, 1 / 3, -2.5e-300, 6.02214076e23, math.pi):
        assert float(format_float(v)) == v


def test_float_uses_17_significant_digits():
    assert format_float(0.1) == "0.10000000000000001"
    assert format_float(1 / 3) == "0.33333333333333331"
    assert format_float(2.0) == "2"


def test_non_finite_text():
    assert format_float(float("nan")) == "nan"
    assert format_float(float("inf")) == "inf"
    assert format_float(-float("inf")) == "-inf"


# --- CSV ---


def test_column_label():
    assert column_label("t", "1/delta_tilde") == "t [1/delta_tilde]"
    assert column_label("purity", "") == "purity [1]"


def test_table_text_layout():
    t = Table.from_columns("demo", [("t", "1/delta_tilde", [0.0, 0.5]), ("x", "1", [1.0, 2.0])])
    text = format_table(t)
    assert text.endswith("\n")
    assert "\r" not in text
    lines = text.splitlines()
    assert lines[0] == "t [1/delta_tilde],x [1]"
    assert lines[1] == "0,1"
    assert len(lines) == 3


def test_parse_table_inverts_format():
    data = np.array([[0.1, float("nan")], [1 / 3, -7.0]])
    t = Table("demo", (("a", "1"), ("b", "1")), data)
    header, parsed = parse_table(format_table(t))
    assert header == ["a [1]", "b [1]"]
    assert parsed[1, 0] == 1 / 3
    assert math.isnan(parsed[0, 1])


# --- JSON ---


def test_jsonable_numpy_values():
    out = jsonable({"a": np.float64(1.5), "b": np.int64(3), "c": np.bool_(True),
                    "d": np.array([1.0, 2.0]), "e": (1, 2)})
    assert out == {"a": 1.5, "b": 3, "c": True, "d": [1.0, 2.0], "e": [1, 2]}
    assert type(out["c"]) is bool


def test_jsonable_non_finite_and_complex():
    out = jsonable({"inf": math.inf, "z": 1 + 2j, 1: None})
    assert out["inf"] == "inf"
    assert out["z"] == {"re": 1.0, "im": 2.0}
    assert out["1"] is None


def test_summary_is_stable():
    a = format_summary({"b": 1, "a": {"y": 2.0, "x": [1, 2]}})
    b = format_summary({"a": {"x": [1, 2], "y": 2.0}, "b": 1})
    assert a == b
    assert a.endswith("\n")
    assert json.loads(a)["a"]["y"] == 2.0
    assert a.index('"a"') < a.index('"b"')
