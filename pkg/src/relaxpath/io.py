"""JSON instance / path / model files.

Floats are written with 17 significant digits so every double round-trips
exactly; infinities are written as the strings ``"inf"`` / ``"-inf"``.
"""
import json
import math

import numpy as np

from .core import SegmentSums, validate_instance, weighted_transform
from .errors import InvalidInstance
from .path import Breakpoint, RelaxationPath, Transition


def _fmt_float(x):
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if math.isnan(x):
        raise ValueError("cannot serialise NaN")
    return "%.17g" % x


def dumps(obj, indent=2, _level=0):
    """``json.dumps`` with fixed 17-digit floats and string infinities."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if obj is None:
        return "null"
    return json.dumps(obj)


def _num(x):
    if isinstance(x, str):
        if x in ("inf", "Infinity", "+inf"):
            return math.inf
        if x in ("-inf", "-Infinity"):
            return -math.inf
        raise ValueError(f"not a number: {x!r}")
    return float(x)


def load_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def instance_from_dict(d):
    """Instance from ``{"u", "q", "m"}``; with ``"delta"`` the weighted transform
    is applied (``m`` must then be absent)."""
    try:
        u = np.asarray(d["u"], dtype=np.float64)
        q = np.asarray(d["q"], dtype=np.float64)
    except KeyError as exc:
        raise InvalidInstance(f"missing key {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise InvalidInstance(str(exc)) from None
    if "delta" in d:
        if "m" in d:
            raise InvalidInstance("give either 'm' or 'delta', not both")
        return weighted_transform(u, q, np.asarray(d["delta"], dtype=np.float64))
    m = d.get("m")
    return validate_instance(u, q, None if m is None else np.asarray(m, dtype=np.float64))


def path_to_dict(path):
    return {
        "objective": path.objective,
        "n": path.n,
        "kappa": path.kappa,
        "nu_inf": path.nu_inf,
        "mu_inf": path.mu_inf,
        "breakpoints": [
            {"nu": bp.nu, "mu": bp.mu,
             "transitions": [{"j": t.line, "direction": t.direction} for t in bp.transitions]}
            for bp in path.breakpoints
        ],
        "segments": [{"M": s.M, "U": s.U, "Q": s.Q} for s in path.segments],
    }


def path_from_dict(d):
    bps = tuple(
        Breakpoint(_num(b["nu"]), _num(b["mu"]),
                   tuple(Transition(int(t["j"]), t["direction"]) for t in b["transitions"]))
        for b in d["breakpoints"])
    segs = tuple(SegmentSums(_num(s["M"]), _num(s["U"]), _num(s["Q"])) for s in d["segments"])
    return RelaxationPath(int(d["n"]), bps, segs, _num(d["nu_inf"]), _num(d["mu_inf"]),
                          d.get("objective", "entropy"))


def write_text(text, out=None):
    if out is None or out == "-":
        import sys
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
