"""Deterministic JSON reports (schema ghx/1).

Floats are written with 17 significant digits so every 64-bit value
round-trips exactly; NaN and infinities become null.  Key order is the
insertion order of the producing code, so equal inputs give equal bytes.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .herm import HermitianForm, format_matrix_text

SCHEMA = "ghx/1"


def _float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    return s if any(c in s for c in ".e") else s + ".0"


def _plain(obj):
    if isinstance(obj, HermitianForm):
        return format_matrix_text(obj)
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return {"re": _plain(obj.real), "im": _plain(obj.imag)}
        return [_plain(v) for v in obj.tolist()] if obj.ndim else _plain(obj.item())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, tuple):
        return [_plain(v) for v in obj]
    return obj


def _encode(obj, indent: int, level: int) -> str:
    obj = _plain(obj)
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(isinstance(_plain(v), (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(report: dict, indent: int = 2) -> str:
    """Serialise ``report`` with the schema tag first."""
    body = {"schema": SCHEMA}
    body.update((k, v) for k, v in report.items() if k != "schema")
    return _encode(body, indent, 0) + "\n"


def write(report: dict, path) -> str:
    text = dumps(report)
    Path(path).write_text(text)
    return text
