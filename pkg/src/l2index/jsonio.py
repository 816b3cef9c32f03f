"""Stable JSON/CSV emission: fixed key order, 12 significant digits."""
from __future__ import annotations

import csv
import io
import json
import math
from importlib import resources

import numpy as np

SIG_DIGITS = 12


def normalize(obj):
    """Round floats to 12 significant digits; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return normalize(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        x = float(f"{x:.{SIG_DIGITS}g}")
        return 0.0 if x == 0 else x
    if isinstance(obj, complex):
        return [normalize(obj.real), normalize(obj.imag)]
    return obj


def dumps(obj) -> str:
    return json.dumps(normalize(obj), indent=2, allow_nan=False) + "\n"


def load_schema(name: str) -> dict:
    text = resources.files("l2index").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


CSV_COLUMNS = ("sample_id", "L", "bound", "norm_sq", "trunc_err", "quad_err", "N", "converged", "class")


def results_csv(rows) -> str:
    """``rows`` are ``(IndexResult, class)`` pairs."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for res, cls in rows:
        vals = normalize([res.sample_id, res.L, res.bound, res.norm_sq, res.trunc_err,
                          res.quad_err, res.N_used])
        writer.writerow(vals + [str(bool(res.converged)).lower(), cls])
    return buf.getvalue()
