"""JSON and CSV serialization of reports."""

import json
from fractions import Fraction

import pytest

from src.config import SCHEMA_VERSION, Verdict
from src.finite_field import extend, make_field
from src.polynomial import parse
from src.reports import dumps, fraction_text, to_jsonable, write_csv, write_json
def test_to_jsonable_handles_report_values():
    k2 = extend(make_field(3), 2)
    payload = {
        "delta": Fraction(1, 9),
        "verdict": Verdict.GOOD,
        "t": k2.gen,
        "poly": parse("x0*x1 + 1", make_field(3), 2),
        "levels": (1, 2),
        "field": k2,
    }
    assert to_jsonable(payload) == {
        "delta": "1/9",
        "verdict": "c-good",
        "t": "y",
        "poly": "x0*x1 + 1",
        "levels": [1, 2],
        "field": "3^1:2",
    }
    with pytest.raises(TypeError):
        to_jsonable(object())


def test_dumps_adds_schema_version():
    body = json.loads(dumps({"a": 1}))
    assert body["schema_version"] == 1
    assert body["a"] == 1


def test_csv_cells(tmp_path):
    target = tmp_path / "rows.csv"
    text = write_csv(
        str(target),
        ["seed", "bias", "ok", "note"],
        [{"seed": 0, "bias": Fraction(1, 2), "ok": True}, {"seed": 1, "note": "a, b"}],
    )
    assert text == 'seed,bias,ok,note\r\n0,1/2,true,\r\n1,,,"a, b"\r\n'
    assert target.read_text(encoding="utf-8", newline="") == text


def test_fraction_text_is_reduced():
    assert fraction_text(Fraction(6, 8)) == "3/4"
    assert fraction_text(Fraction(2)) == "2/1"


def test_write_json_creates_parent_directories(tmp_path):
    target = tmp_path / "deep" / "report.json"
    write_json(str(target), {"b": [Fraction(1, 3)]})
    body = json.loads(target.read_text(encoding="utf-8"))
    assert body == {"b": ["1/3"], "schema_version": SCHEMA_VERSION}
