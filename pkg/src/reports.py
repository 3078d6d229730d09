"""JSON and CSV output for every report the lab produces.

Reports are dataclasses; :func:`to_jsonable` turns them (and the field
elements, polynomials, Fractions and enums inside them) into plain JSON
values. Fractions are written as ``"a/b"`` so exact quantities survive.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
import sys
import threading
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, Iterable, Optional, Sequence

from src.config import SCHEMA_VERSION
from src.finite_field import FieldCtx, FieldElement
from src.polynomial import MultiPoly

_lock = threading.Lock()

__all__ = ["to_jsonable", "dumps", "write_json", "write_csv", "fraction_text"]


def fraction_text(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def to_jsonable(obj: Any) -> Any:
    """Recursively convert report objects to JSON-ready values."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else str(obj)
    if isinstance(obj, Fraction):
        return fraction_text(obj)
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (FieldElement, MultiPoly)):
        return str(obj)
    if isinstance(obj, FieldCtx):
        return obj.spec
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(to_jsonable(k)): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(payload: Any) -> str:
    body = to_jsonable(payload)
    if isinstance(body, dict):
        body = {"schema_version": SCHEMA_VERSION, **body}
    return json.dumps(body, indent=2, ensure_ascii=False) + "\n"


def _emit(path: Optional[str], text: str) -> None:
    if path in (None, "", "-"):
        sys.stdout.write(text)
        return
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with _lock:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)


def write_json(path: Optional[str], payload: Any) -> str:
    """Write ``payload`` to ``path`` (stdout for ``None``/``-``); return the text."""
    text = dumps(payload)
    _emit(path, text)
    return text


def write_csv(
    path: Optional[str], header: Sequence[str], rows: Iterable[Dict[str, Any]]
) -> str:
    """RFC-style CSV via :mod:`csv`; missing cells are empty."""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(header), lineterminator="\r\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _cell(row.get(k)) for k in header})
    text = buffer.getvalue()
    _emit(path, text)
    return text


def _cell(value: Any) -> Any:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (Fraction, Enum, FieldElement, MultiPoly)):
        return to_jsonable(value)
    return value
