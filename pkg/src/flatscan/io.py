"""JSON reading and writing for diagrams and scan results.

Floats are written with 17 significant digits, which round-trips every
double exactly; infinite deaths are the string ``"inf"``.
"""

import json
import math

import numpy as np

from .grassmann import Flat
from .persistence import PersistenceDiagram
from .transform import DphtResult

__all__ = [
    "format_float",
    "dumps",
    "diagram_to_dict",
    "diagram_from_dict",
    "result_to_dict",
    "result_from_dict",
    "load_json",
]


def format_float(x):
    """17-significant-digit text for a finite float; ``"inf"`` handled by callers."""
    s = "%.17g" % x
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def _encode(obj, out):
    if isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(", ")
            out.append(json.dumps(str(k)))
            out.append(": ")
            _encode(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(", ")
            _encode(v, out)
        out.append("]")
    elif isinstance(obj, (bool, np.bool_)) or obj is None or isinstance(obj, str):
        out.append(json.dumps(obj if not isinstance(obj, np.bool_) else bool(obj)))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isinf(x) and x > 0:
            out.append('"inf"')
        elif not math.isfinite(x):
            raise ValueError(f"cannot serialise {x}")
        else:
            out.append(format_float(x))
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj):
    """Deterministic JSON text with the float convention of this module."""
    out = []
    _encode(obj, out)
    return "".join(out) + "\n"


def _death(x):
    if x == "inf":
        return math.inf
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return float(x)
    raise ValueError(f"bad diagram coordinate {x!r}")


def diagram_to_dict(D):
    return {"degree": int(D.degree), "points": [[float(b), float(d)] for b, d in D.points]}


def diagram_from_dict(obj):
    try:
        degree = obj["degree"]
        raw = obj["points"]
    except (KeyError, TypeError):
        raise ValueError("diagram needs 'degree' and 'points'") from None
    if not isinstance(degree, int) or degree < 0:
        raise ValueError("diagram degree must be a non-negative integer")
    pts = []
    for p in raw:
        if not isinstance(p, list) or len(p) != 2:
            raise ValueError("diagram points must be [birth, death] pairs")
        pts.append((_death(p[0]), _death(p[1])))
    return PersistenceDiagram(degree, np.array(pts, dtype=float).reshape(-1, 2))


def result_to_dict(result):
    flats = []
    for i, P in enumerate(result.flats):
        entry = {
            "basis": P.basis.tolist(),
            "displacement": P.displacement.tolist(),
            "diagrams": [diagram_to_dict(D) for D in result.diagrams[i]],
        }
        if result.euler_curves is not None:
            entry["euler_curve"] = [[float(r), int(c)] for r, c in result.euler_curves[i]]
        if result.slice_chi is not None:
            entry["slice_chi"] = int(result.slice_chi[i])
        flats.append(entry)
    return {
        "shape_id": result.shape_id,
        "m": int(result.m),
        "max_degree": int(result.max_degree),
        "flats": flats,
    }


def result_from_dict(obj):
    try:
        shape_id = str(obj["shape_id"])
        m = int(obj["m"])
        entries = obj["flats"]
    except (KeyError, TypeError, ValueError):
        raise ValueError("scan result needs 'shape_id', 'm' and 'flats'") from None
    flats, diagrams, curves, chis = [], [], [], []
    for e in entries:
        basis = np.array(e["basis"], dtype=float)
        disp = np.array(e["displacement"], dtype=float)
        flats.append(Flat(basis.reshape(-1, disp.shape[0]), disp))
        diagrams.append([diagram_from_dict(d) for d in e["diagrams"]])
        curves.append([(float(r), int(c)) for r, c in e["euler_curve"]] if "euler_curve" in e else None)
        chis.append(int(e["slice_chi"]) if "slice_chi" in e else None)
    default = max(m - 1, 0)
    max_degree = int(obj.get("max_degree", len(diagrams[0]) - 1 if diagrams else default))
    return DphtResult(
        shape_id=shape_id,
        m=m,
        flats=flats,
        diagrams=diagrams,
        max_degree=max_degree,
        euler_curves=curves if curves and all(c is not None for c in curves) else None,
        slice_chi=chis if chis and all(c is not None for c in chis) else None,
    )


def load_json(text):
    """Parse a scan result or a single diagram; raises ``ValueError`` on malformed input."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed JSON: {exc}") from None
    if isinstance(obj, dict) and "flats" in obj:
        try:
            return result_from_dict(obj)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed scan result: {exc}") from None
    if isinstance(obj, dict) and "points" in obj:
        return diagram_from_dict(obj)
    raise ValueError("JSON is neither a scan result nor a diagram")
