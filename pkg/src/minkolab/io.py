"""JSON and CSV formats.

Measures:  {"dim": n, "atoms": [[u_1, ..., u_n, w], ...]}
Polytopes: {"dim": n, "halfspaces": [[u_1, ..., u_n, h], ...]}
Sweeps:    CSV with header epsilon,seed,theta,theta_plus,dc,w1,alpha,hausdorff,main_ratio

Floats are written with 17 significant digits so files round-trip exactly.
"""
from __future__ import annotations

import csv
import dataclasses
import io as _io
import json
import math

import numpy as np

from .errors import DimensionMismatch, InvalidMeasure
from .measure import DirectionalMeasure
from .polytope import from_halfspaces
from .stability import CSV_FIELDS, SweepRecord

UNIT_TOL = 1e-9


def format_float(x):
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return "%.17g" % x


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if dataclasses.is_dataclass(obj):
        obj = dataclasses.asdict(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent=2):
    """Deterministic JSON with 17-significant-digit floats."""
    return _encode(obj, indent, 0) + "\n"


def write_json(obj, path):
    with open(path, "w") as fh:
        fh.write(dumps(obj))


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


# -- measures and polytopes


def measure_to_dict(mu):
    rows = np.column_stack([mu.directions, mu.weights])
    return {"dim": mu.dim, "atoms": rows.tolist()}


def measure_from_dict(data):
    try:
        dim = int(data["dim"])
        rows = np.asarray(data["atoms"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidMeasure(f"malformed measure: {exc}") from exc
    if rows.ndim != 2 or rows.shape[1] != dim + 1:
        raise DimensionMismatch(f"atoms must have {dim + 1} entries each")
    norms = np.linalg.norm(rows[:, :dim], axis=1)
    bad = np.abs(norms - 1.0) > UNIT_TOL
    if np.any(bad):
        raise InvalidMeasure(f"atom {int(np.argmax(bad))} has direction norm "
                             f"{norms[bad][0]:.12g}, expected 1")
    return DirectionalMeasure(rows[:, :dim], rows[:, dim])


def load_measure(path):
    return measure_from_dict(read_json(path))


def save_measure(mu, path):
    write_json(measure_to_dict(mu), path)


def polytope_to_dict(P):
    rows = np.column_stack([P.normals, P.offsets])
    return {"dim": P.dim, "halfspaces": rows.tolist()}


def polytope_from_dict(data):
    """Rebuilds the body from its halfspaces; vertices are never read from the file."""
    try:
        dim = int(data["dim"])
        rows = np.asarray(data["halfspaces"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed polytope: {exc}") from exc
    if rows.ndim != 2 or rows.shape[1] != dim + 1:
        raise DimensionMismatch(f"halfspaces must have {dim + 1} entries each")
    return from_halfspaces(rows[:, :dim], rows[:, dim])


def load_polytope(path):
    return polytope_from_dict(read_json(path))


def save_polytope(P, path):
    write_json(polytope_to_dict(P), path)


# -- sweep records


def records_to_csv(records):
    buf = _io.StringIO()
    buf.write(",".join(CSV_FIELDS) + "\n")
    for r in records:
        cells = []
        for name in CSV_FIELDS:
            v = getattr(r, name)
            cells.append(str(int(v)) if name == "seed" else format_float(v))
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


def records_from_csv(text):
    reader = csv.DictReader(_io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_FIELDS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    out = []
    for row in reader:
        vals = {k: float(row[k]) for k in CSV_FIELDS if k != "seed"}
        out.append(SweepRecord(seed=int(row["seed"]), **vals))
    return out
