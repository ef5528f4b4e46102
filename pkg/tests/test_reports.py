from __future__ import annotations

import csv
import json
import math

from phi4flow.reports import SCHEMA_VERSION, CertReport, dumps, reports_to_csv, write_csv, write_json


def _report():
    r = CertReport("demo", "a small domain")
    r.add("loose", 10.0, 1.0)
    r.add("tight", 1.0, 0.99)
    return r


def test_pass_fail_and_worst():
    r = _report()
    assert r.passed and not r.failures
    assert r.worst.name == "tight"
    r.add("broken", 1.0, 2.0)
    assert not r.passed and [c.name for c in r.failures] == ["broken"]
    assert "[FAIL]" in r.summary() and "1 failing checks" in r.summary()


def test_empty_report_does_not_pass():
    assert not CertReport("x", "nothing").passed


def test_explicit_pass_flag_overrides_comparison():
    r = CertReport("x", "d")
    c = r.add("boolean property", 1.0, 5.0, passed=True)
    assert c.passed and c.margin == -4.0


def test_json_is_strict_with_non_finite_values():
    text = dumps({"a": math.inf, "b": [math.nan, -math.inf], "c": 1.5})
    doc = json.loads(text)
    assert doc == {"a": "inf", "b": ["nan", "-inf"], "c": 1.5}
    assert "NaN" not in text and "Infinity" not in text


def test_write_json_schema_and_sorted(tmp_path):
    p = write_json(tmp_path / "sub" / "r.json", {"z": 1, "a": 0.1}, config={"seed": 0})
    doc = json.loads(p.read_text())
    assert doc["schema_version"] == SCHEMA_VERSION
    assert doc["config"] == {"seed": 0}
    assert p.read_text().index('"a"') < p.read_text().index('"z"')


def test_float_round_trip_in_json_and_csv(tmp_path):
    x = 0.1 + 0.2
    doc = json.loads(dumps({"x": x}))
    assert doc["x"] == x
    p = write_csv(tmp_path / "t.csv", ["x"], [[x]])
    rows = list(csv.reader(p.open()))
    assert float(rows[1][0]) == x


def test_reports_csv_has_one_row_per_check():
    text = reports_to_csv([_report(), _report()])
    rows = list(csv.reader(text.splitlines()))
    assert rows[0][:3] == ["lemma", "check", "claimed"]
    assert len(rows) == 5
