"""JSON interchange for tuples and reports.

A tuple document looks like::

    {"schema_version": "1",
     "q": {"re": 0.4, "im": 0.0},
     "poles": [{"re": 0.0, "im": 0.0}, ...],
     "matrices": [[[{"re": ..., "im": ...}, ...], ...], ...],
     "metadata": {"name": "qhg", "params": {...}}}

Floats are written with ``repr`` (shortest round-trip decimal), so
``load(dump(doc))`` reproduces every entry bit for bit.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import QMCError
from .system import SystemTuple

__all__ = ["SCHEMA_VERSION", "FormatError", "TupleDocument", "to_jsonable", "dumps", "loads",
           "save", "load"]

SCHEMA_VERSION = "1"


class FormatError(QMCError, ValueError):
    """Raised for documents that do not follow the tuple schema."""


def _cnum(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _parse_cnum(obj, where: str) -> complex:
    if not isinstance(obj, dict) or set(obj) != {"re", "im"}:
        raise FormatError(f"{where}: expected an object with keys re and im, got {obj!r}")
    re_, im_ = obj["re"], obj["im"]
    for v in (re_, im_):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise FormatError(f"{where}: non-numeric or non-finite component {v!r}")
    return complex(float(re_), float(im_))


def to_jsonable(obj):
    """Recursively convert numpy values and complex numbers into JSON-ready objects."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return _cnum(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if obj is None or isinstance(obj, str):
        return obj
    return repr(obj)


@dataclass
class TupleDocument:
    """A system tuple plus free-form metadata."""

    tuple: SystemTuple
    metadata: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        t = self.tuple
        doc = {
            "schema_version": SCHEMA_VERSION,
            "q": _cnum(t.q),
            "poles": [_cnum(b) for b in t.poles],
            "matrices": [[[_cnum(z) for z in row] for row in np.asarray(M)] for M in t.matrices],
        }
        if self.metadata:
            doc["metadata"] = to_jsonable(self.metadata)
        return doc

    @classmethod
    def from_json(cls, doc) -> "TupleDocument":
        if not isinstance(doc, dict):
            raise FormatError("top level must be an object")
        missing = {"schema_version", "q", "poles", "matrices"} - set(doc)
        if missing:
            raise FormatError(f"missing keys: {sorted(missing)}")
        if doc["schema_version"] != SCHEMA_VERSION:
            raise FormatError(f"unsupported schema_version {doc['schema_version']!r}")
        q = _parse_cnum(doc["q"], "q")
        if not isinstance(doc["poles"], list) or not doc["poles"]:
            raise FormatError("poles must be a non-empty list")
        poles = [_parse_cnum(b, f"poles[{i}]") for i, b in enumerate(doc["poles"])]
        if poles[0] != 0:
            raise FormatError("poles[0] must be exactly 0")
        mats_in = doc["matrices"]
        if not isinstance(mats_in, list) or len(mats_in) != len(poles):
            raise FormatError("need one matrix per pole")
        mats = []
        m = None
        for k, M in enumerate(mats_in):
            if not isinstance(M, list) or not M or not all(isinstance(r, list) for r in M):
                raise FormatError(f"matrices[{k}] must be a list of rows")
            m = len(M) if m is None else m
            if len(M) != m or any(len(r) != m for r in M):
                raise FormatError(f"matrices[{k}] is not {m}x{m}")
            mats.append(np.array([[_parse_cnum(z, f"matrices[{k}][{i}][{j}]")
                                   for j, z in enumerate(r)] for i, r in enumerate(M)]))
        meta = doc.get("metadata", {})
        if not isinstance(meta, dict):
            raise FormatError("metadata must be an object")
        try:
            t = SystemTuple(q, poles, mats)
        except (ValueError, ArithmeticError) as exc:
            raise FormatError(f"invalid tuple: {exc}") from exc
        return cls(t, meta)


def dumps(obj, indent: int | None = 1) -> str:
    if isinstance(obj, TupleDocument):
        obj = obj.to_json()
    elif isinstance(obj, SystemTuple):
        obj = TupleDocument(obj).to_json()
    return json.dumps(to_jsonable(obj), indent=indent, allow_nan=False)


def loads(text: str) -> TupleDocument:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
    return TupleDocument.from_json(doc)


def save(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))
        fh.write("\n")


def load(path) -> TupleDocument:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    return loads(text)
