"""Canonical serialization and record shape tests."""

import json
import math
from fractions import Fraction

import pytest

from residua.currents import ExactValue
from residua.reports import (
    CSV_HEADER,
    FailureRecord,
    ReportRecord,
    TOOL_VERSION,
    canonical_json,
    emit_report,
    IoFailure,
    parse_exact_scalar,
    study_rows_csv,
)


def test_canonical_json_is_sorted_and_compact():
    text = canonical_json({"b": 1, "a": [2, 3]})
    assert text == '{"a":[2,3],"b":1}\n'


def test_canonical_json_fraction_and_complex():
    text = canonical_json({"v": Fraction(-4, 3), "c": complex(1.5, -2.0)})
    assert json.loads(text) == {"v": "-4/3", "c": {"re": 1.5, "im": -2.0}}


def test_canonical_json_rejects_nan():
    with pytest.raises(ValueError):
        canonical_json({"v": math.nan})


def test_canonical_json_deterministic():
    payload = {"z": [1.25, {"k": Fraction(7, 2)}], "a": "x"}
    assert canonical_json(payload) == canonical_json(payload)


def test_exact_scalar_round_trip():
    value = ExactValue.rational(Fraction(-4), 2, 0)
    obj = value.to_jsonable()
    assert obj == {"q": "-4/1", "pi": 2, "i": 0}
    assert parse_exact_scalar(obj) == (Fraction(-4), 2, 0)
    rebuilt = json.loads(canonical_json(obj))
    assert parse_exact_scalar(rebuilt) == (Fraction(-4), 2, 0)


def test_report_record_shape():
    record = ReportRecord(
        command="duality",
        inputs={"ci": ["z"], "g": "z"},
        report={"annihilated": True},
        passed=True,
        notes=("a note",),
    )
    body = record.to_jsonable()
    assert body["command"] == "duality"
    assert body["pass"] is True
    assert body["notes"] == ["a note"]
    assert body["toolVersion"] == TOOL_VERSION
    assert body["schemaVersion"] == 1
    assert json.loads(record.to_json())["inputs"] == {"ci": ["z"], "g": "z"}


def test_failure_record_shape():
    record = FailureRecord(
        command="ch-eval",
        inputs={"factors": ["x1^0"]},
        error_type="ParseError",
        message="zero exponent disallowed",
        usage=True,
    )
    body = record.to_jsonable()
    assert body["pass"] is False
    assert body["usage"] is True
    assert body["error"]["type"] == "ParseError"


def test_study_rows_csv_format():
    rows = [
        {"delta": 0.2, "value": [1.5, -0.25], "absErr": 0.125},
        {"delta": 0.05, "value": [0.0, 0.0], "absErr": 0.0},
    ]
    text = study_rows_csv(rows)
    lines = text.strip().split("\n")
    assert lines[0] == CSV_HEADER == "delta,value_re,value_im,abs_err"
    assert lines[1] == "0.2,1.5,-0.25,0.125"
    assert lines[2] == "0.05,0,0,0"


def test_emit_report_to_file(tmp_path):
    target = tmp_path / "report.json"
    emit_report('{"ok":true}\n', str(target))
    assert target.read_text() == '{"ok":true}\n'


def test_emit_report_to_stdout(capsys):
    emit_report("hello\n", None)
    assert capsys.readouterr().out == "hello\n"


def test_emit_report_bad_path(tmp_path):
    with pytest.raises(IoFailure):
        emit_report("x", str(tmp_path / "missing" / "deep" / "report.json"))
