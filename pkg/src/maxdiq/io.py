"""CSV and JSON writers with byte-stable output.

Floats are written with :func:`repr`, the shortest decimal string that
round-trips, so repeated runs produce identical files. CSV files use ``,``
separators, ``.`` decimals, a header row and LF line endings.
"""
from __future__ import annotations

import json
import math
import os

import numpy as np

__all__ = ["format_float", "write_csv", "write_json", "to_jsonable"]


def format_float(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        return "0.0"
    return repr(x)


def write_csv(path, header, columns):
    """Write equal-length columns under ``header``."""
    cols = [np.asarray(c, dtype=float).ravel() for c in columns]
    n = {len(c) for c in cols}
    if len(n) > 1:
        raise ValueError("CSV columns differ in length")
    lines = [",".join(header)]
    for row in zip(*cols):
        lines.append(",".join(format_float(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def to_jsonable(obj):
    """Convert numpy scalars/arrays and complex numbers for :mod:`json`."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, payload):
    text = json.dumps(to_jsonable(payload), indent=2, sort_keys=True, allow_nan=False)
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text + "\n")
    os.replace(tmp, path)
