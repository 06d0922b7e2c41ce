"""Turning results into stable JSON and line-oriented text."""

from __future__ import annotations

import dataclasses
import json
import math

import numpy as np

from .errors import NthboundError, ParseError, SchemaError

SCHEMA_VERSION = 1


def jsonable(obj):
    """Recursively convert results to plain JSON types."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return str(x)
        # -0.0 prints as "-0.0"; keep reports free of sign noise
        return x + 0.0
    return obj


def error_payload(exc: BaseException) -> dict:
    out = {"type": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ParseError):
        out["line"] = exc.line
        out["column"] = exc.column
    if isinstance(exc, SchemaError):
        out["errors"] = [{"path": p, "message": m} for p, m in exc.errors]
    if not isinstance(exc, NthboundError):
        out["message"] = f"{type(exc).__name__}: {exc}"
    return out


def envelope(command: str, body: dict | None = None, error: BaseException | None = None) -> dict:
    doc = {"schema_version": SCHEMA_VERSION, "command": command}
    if body is not None:
        doc.update(jsonable(body))
    if error is not None:
        doc["error"] = error_payload(error)
    return doc


def to_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _flatten(prefix, obj, out):
    if isinstance(obj, dict):
        if not obj:
            out.append((prefix, "{}"))
        for k in sorted(obj):
            _flatten(f"{prefix}.{k}" if prefix else k, obj[k], out)
    elif isinstance(obj, list) and obj and any(isinstance(v, (dict, list, str)) for v in obj):
        for i, v in enumerate(obj):
            _flatten(f"{prefix}[{i}]", v, out)
    else:
        out.append((prefix, _scalar(obj)))


def _scalar(v):
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return "[" + ", ".join(_scalar(x) for x in v) + "]"
    return str(v)


def to_text(doc: dict) -> str:
    """One ``key  value`` line per leaf, keys sorted, values aligned."""
    rows = []
    _flatten("", doc, rows)
    width = max(len(k) for k, _ in rows)
    return "".join(f"{k.ljust(width)}  {v}\n" for k, v in rows)
