"""Verification reports and their JSON / CSV serialization."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable

SCHEMA_VERSION = "1.0"


@dataclass
class Check:
    """One inequality ``computed <= claimed`` (or a boolean property) and its outcome."""

    name: str
    claimed: float
    computed: float
    passed: bool
    note: str = ""

    @property
    def margin(self) -> float:
        return self.claimed - self.computed


@dataclass
class CertReport:
    lemma: str
    domain: str
    checks: list[Check] = field(default_factory=list)
    info: dict[str, Any] = field(default_factory=dict)

    def add(self, name: str, claimed: float, computed: float, passed: bool | None = None, note: str = "") -> Check:
        if passed is None:
            passed = bool(computed <= claimed)
        c = Check(name, float(claimed), float(computed), bool(passed), note)
        self.checks.append(c)
        return c

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    @property
    def worst(self) -> Check | None:
        """Check with the smallest relative slack (claimed - computed) / |claimed|."""
        def slack(c: Check) -> float:
            scale = abs(c.claimed) or 1.0
            return (c.claimed - c.computed) / scale
        return min(self.checks, key=slack) if self.checks else None

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        w = self.worst
        tail = f"; tightest: {w.name} computed={w.computed:.6g} claimed={w.claimed:.6g}" if w else ""
        bad = f"; {len(self.failures)} failing checks" if self.failures else ""
        return f"[{status}] {self.lemma} over {self.domain}{bad}{tail}"

    def to_dict(self) -> dict:
        return {
            "lemma": self.lemma,
            "domain": self.domain,
            "passed": self.passed,
            "checks": [dict(asdict(c), margin=c.margin) for c in self.checks],
            "info": self.info,
        }


def _clean(obj):
    """Replace non-finite floats so the output is strict JSON."""
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and callable(obj.item):  # numpy scalars
        return _clean(obj.item())
    return obj


def dumps(payload: Any) -> str:
    # json emits repr(float), the shortest string that round-trips (at most 17 digits)
    text = json.dumps(_clean(payload), indent=2, sort_keys=True, ensure_ascii=False)
    return text + "\n"


def write_json(path: str | Path, payload: Any, config: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"schema_version": SCHEMA_VERSION, "payload": payload}
    if config is not None:
        doc["config"] = config
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(doc))
    return path


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(path: str | Path, header: Iterable[str], rows: Iterable[Iterable[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(header))
        for row in rows:
            w.writerow([format_float(v) if isinstance(v, float) else v for v in row])
    return path


def reports_to_csv(reports: Iterable[CertReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["lemma", "check", "claimed", "computed", "margin", "passed", "note"])
    for r in reports:
        for c in r.checks:
            w.writerow([r.lemma, c.name, format_float(c.claimed), format_float(c.computed),
                        format_float(c.margin), c.passed, c.note])
    return buf.getvalue()
