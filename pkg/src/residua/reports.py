"""Deterministic report records and their serialization.

Every command produces a ReportRecord: the echoed input, the structured
result, a pass flag, and the tool version.  Serialization is canonical
(sorted keys, fixed separators, no whitespace variance) so identical
requests yield byte-identical output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

TOOL_VERSION = "0.1.0"
SCHEMA_VERSION = 1

CSV_HEADER = "delta,value_re,value_im,abs_err"


def _canonical(value: Any) -> Any:
    """Normalize a value tree for canonical JSON emission."""
    if isinstance(value, dict):
        return {str(k): _canonical(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_canonical(v) for v in value]
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, float) and value == int(value) and abs(value) < 1e15:
        # stabilize integral floats so repr noise cannot differ across runs
        return float(value)
    return value


def canonical_json(value: Any) -> str:
    """Serialize with sorted keys and fixed separators; ends in a newline."""
    return json.dumps(_canonical(value), sort_keys=True, separators=(",", ":"),
                      allow_nan=False) + "\n"


def parse_exact_scalar(obj: dict) -> tuple[Fraction, int, int]:
    """Invert the exact-value serialization {"q": "p/q", "pi": a, "i": b}."""
    return Fraction(obj["q"]), int(obj["pi"]), int(obj["i"])


@dataclass(frozen=True)
class ReportRecord:
    """One command run: echoed input, result payload, and verdict."""

    command: str
    inputs: dict
    report: dict
    passed: bool
    notes: tuple[str, ...] = ()
    version: str = TOOL_VERSION
    schema: int = SCHEMA_VERSION

    def to_jsonable(self) -> dict:
        return {
            "command": self.command,
            "inputs": _canonical(self.inputs),
            "report": _canonical(self.report),
            "pass": self.passed,
            "notes": list(self.notes),
            "toolVersion": self.version,
            "schemaVersion": self.schema,
        }

    def to_json(self) -> str:
        return canonical_json(self.to_jsonable())


@dataclass(frozen=True)
class FailureRecord:
    """A structured failure: the error class name and its message."""

    command: str
    inputs: dict
    error_type: str
    message: str
    usage: bool = False
    version: str = TOOL_VERSION
    schema: int = SCHEMA_VERSION

    def to_jsonable(self) -> dict:
        return {
            "command": self.command,
            "inputs": _canonical(self.inputs),
            "error": {"type": self.error_type, "message": self.message},
            "usage": self.usage,
            "pass": False,
            "toolVersion": self.version,
            "schemaVersion": self.schema,
        }

    def to_json(self) -> str:
        return canonical_json(self.to_jsonable())


def study_rows_csv(rows: list[dict]) -> str:
    """CSV for convergence-study rows as they appear in a JSON report."""
    lines = [CSV_HEADER]
    for row in rows:
        re_part, im_part = row["value"]
        lines.append(
            f"{row['delta']:.12g},{re_part:.12g},{im_part:.12g},{row['absErr']:.12g}"
        )
    return "\n".join(lines) + "\n"


def emit_report(text: str, path: str | None) -> None:
    """Write report text to a file, or stdout when path is None."""
    if path is None:
        print(text, end="")
        return
    try:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


class IoFailure(Exception):
    """Filesystem-level failure while emitting a report (exit code 2)."""
