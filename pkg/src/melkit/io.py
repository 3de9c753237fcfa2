"""JSON documents for perturbations.

Smooth::

    {"kind": "smooth", "n": 1, "s1": 1, "s2": 3,
     "a": [["1", "0", "-1/2"], ["0", "2", "0"]],      # row i = cos^i, column s - s1
     "a_tilde": [["0", "0", "0"]]}                    # row i = sin * cos^i (optional)

Piecewise adds ``"s3"`` and replaces the tables by ``"plus"`` / ``"minus"``
objects, each ``{"a": ..., "a_tilde": ...}`` (missing side = zero).
Entries are integers or ``"p/q"`` strings; floats are refused.
"""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from .perturbation import PiecewisePerturbation, SmoothPerturbation

__all__ = ["SchemaError", "perturbation_from_json", "perturbation_to_json", "load_perturbation",
           "SCHEMA_VERSION"]

SCHEMA_VERSION = 1


class SchemaError(ValueError):
    """Invalid perturbation document; the message names the offending field."""


def _int(d: dict, key: str, path: str, minimum: int) -> int:
    if key not in d:
        raise SchemaError(f"{path}{key}: {key} required")
    v = d[key]
    if not isinstance(v, int) or isinstance(v, bool):
        raise SchemaError(f"{path}{key}: expected integer, got {v!r}")
    if v < minimum:
        raise SchemaError(f"{path}{key}: must be >= {minimum}, got {v}")
    return v


def _rational(v: Any, where: str) -> Fraction:
    if isinstance(v, bool) or isinstance(v, float):
        raise SchemaError(f"{where}: {v!r} is not exact; use an integer or a 'p/q' string")
    try:
        return Fraction(v)
    except (ValueError, TypeError, ZeroDivisionError):
        raise SchemaError(f"{where}: cannot parse {v!r} as a rational") from None


def _table(d: dict, key: str, rows: int, cols: int, path: str, required: bool):
    if key not in d or d[key] is None:
        if required:
            raise SchemaError(f"{path}{key}: {key} required")
        return None
    t = d[key]
    if not isinstance(t, list):
        raise SchemaError(f"{path}{key}: expected a list of rows")
    if len(t) > rows:
        raise SchemaError(f"{path}{key}: {len(t)} rows but index i ranges over 0..{rows - 1} "
                          f"(row {rows} and beyond exceed the degree)")
    out = []
    for i, row in enumerate(t):
        if not isinstance(row, list):
            raise SchemaError(f"{path}{key}[{i}]: expected a list")
        if len(row) != cols:
            raise SchemaError(f"{path}{key}[{i}]: expected {cols} entries (powers s1..), got {len(row)}")
        out.append([_rational(v, f"{path}{key}[{i}][{j}]") for j, v in enumerate(row)])
    while len(out) < rows:
        out.append([Fraction(0)] * cols)
    return out


def _side(d: dict, n: int, s1: int, s2: int, path: str, required_a: bool) -> SmoothPerturbation:
    w = s2 - s1 + 1
    a = _table(d, "a", n + 1, w, path, required_a)
    at = _table(d, "a_tilde", n, w, path, False)
    return SmoothPerturbation(n, s1, s2, a, at)


def perturbation_from_json(doc: dict) -> SmoothPerturbation | PiecewisePerturbation:
    if not isinstance(doc, dict):
        raise SchemaError("document must be a JSON object")
    kind = doc.get("kind")
    if kind not in ("smooth", "piecewise"):
        raise SchemaError(f"kind: expected 'smooth' or 'piecewise', got {kind!r}")
    n = _int(doc, "n", "", 0)
    s1 = _int(doc, "s1", "", 1)
    s2 = _int(doc, "s2", "", s1)
    if kind == "smooth":
        return _side(doc, n, s1, s2, "", True)
    s3 = _int(doc, "s3", "", s1)
    for key in ("plus", "minus"):
        if key in doc and not isinstance(doc[key], dict):
            raise SchemaError(f"{key}: expected an object with 'a' / 'a_tilde'")
    plus = _side(doc.get("plus") or {}, n, s1, s2, "plus.", False)
    minus = _side(doc.get("minus") or {}, n, s1, s3, "minus.", False)
    return PiecewisePerturbation(n, s1, s2, s3, plus, minus)


def _dump_table(t) -> list[list[str]]:
    return [[str(v) for v in row] for row in t]


def perturbation_to_json(p: SmoothPerturbation | PiecewisePerturbation) -> dict:
    if isinstance(p, PiecewisePerturbation):
        return {"kind": "piecewise", "n": p.n, "s1": p.s1, "s2": p.s2, "s3": p.s3,
                "plus": {"a": _dump_table(p.plus.a), "a_tilde": _dump_table(p.plus.a_tilde)},
                "minus": {"a": _dump_table(p.minus.a), "a_tilde": _dump_table(p.minus.a_tilde)}}
    return {"kind": "smooth", "n": p.n, "s1": p.s1, "s2": p.s2,
            "a": _dump_table(p.a), "a_tilde": _dump_table(p.a_tilde)}


def load_perturbation(path: str | Path) -> SmoothPerturbation | PiecewisePerturbation:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from None
    try:
        return perturbation_from_json(doc)
    except SchemaError as e:
        raise SchemaError(f"{path}: {e}") from None
