"""JSON instance files and JSON reports."""

from __future__ import annotations

import hashlib
import json
import math
import os

import numpy as np

from . import __version__
from .core import (CyclomonError, ExtensionInstance, LinearOperator, OperatorGraph,
                   Tolerances)

__all__ = [
    "InstanceError",
    "TOLERANCE_ENV",
    "tolerances_from_env",
    "load_instance",
    "dump_instance",
    "instance_to_dict",
    "instance_hash",
    "make_report",
    "write_report",
    "read_report",
]

TOLERANCE_ENV = "CYCLOMON_TOLERANCES"
FEAS_NOTE = ("monotone within tolerance means worst cyclic sum <= feas_tol; "
             "exact inequalities are replaced by this floating-point test")

_TOP_KEYS = {"dimension", "graph", "n", "B", "w_star", "tolerances"}
_TOL_KEYS = {"feas_tol", "num_tol", "opt_tol", "max_iter"}


class InstanceError(CyclomonError, ValueError):
    """Malformed instance; ``field`` names the offending entry."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


def _reject_constant(name):
    raise ValueError(f"non-finite number {name}")


def _number(value, field):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InstanceError(field, f"expected a number, got {type(value).__name__}")
    if not math.isfinite(value):
        raise InstanceError(field, "non-finite number")
    return float(value)


def _vector(value, field, d):
    if not isinstance(value, list):
        raise InstanceError(field, "expected a list of numbers")
    if len(value) != d:
        raise InstanceError(field, f"dimension mismatch: expected length {d}, got {len(value)}")
    return [_number(v, f"{field}[{i}]") for i, v in enumerate(value)]


def _tolerances(data, field, base):
    if not isinstance(data, dict):
        raise InstanceError(field, "expected an object")
    unknown = set(data) - _TOL_KEYS
    if unknown:
        raise InstanceError(f"{field}.{sorted(unknown)[0]}", "unknown tolerance")
    values = {}
    for key, v in data.items():
        if key == "max_iter":
            if isinstance(v, bool) or not isinstance(v, int):
                raise InstanceError(f"{field}.max_iter", "expected an integer")
            values[key] = v
        else:
            values[key] = _number(v, f"{field}.{key}")
    try:
        return base.replace(**values)
    except ValueError as exc:
        raise InstanceError(field, str(exc)) from None


def tolerances_from_env(environ=None):
    """Default tolerances, overridden by the JSON object in ``CYCLOMON_TOLERANCES``."""
    environ = os.environ if environ is None else environ
    raw = environ.get(TOLERANCE_ENV)
    if not raw:
        return Tolerances()
    try:
        data = json.loads(raw, parse_constant=_reject_constant)
    except ValueError as exc:
        raise InstanceError(TOLERANCE_ENV, f"invalid JSON ({exc})") from None
    return _tolerances(data, TOLERANCE_ENV, Tolerances())


def load_instance(text, defaults=None):
    """Parse an instance from a JSON string or text stream.

    Missing ``B`` means the zero map, missing ``w_star`` the zero vector and
    missing tolerances the ``defaults``.  Repeated graph pairs are dropped
    and recorded in ``instance.warnings``.
    """
    if hasattr(text, "read"):
        text = text.read()
    try:
        data = json.loads(text, parse_constant=_reject_constant)
    except ValueError as exc:
        raise InstanceError("<document>", f"invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise InstanceError("<document>", "expected a JSON object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise InstanceError(sorted(unknown)[0], "unknown field")
    for key in ("dimension", "graph", "n"):
        if key not in data:
            raise InstanceError(key, "required field missing")
    d = data["dimension"]
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise InstanceError("dimension", "expected a positive integer")
    n = data["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 2:
        raise InstanceError("n", "expected an integer >= 2")
    graph = data["graph"]
    if not isinstance(graph, list) or not graph:
        raise InstanceError("graph", "expected a nonempty list of [s, s_star] pairs")
    points, duals = [], []
    for i, pair in enumerate(graph):
        if not isinstance(pair, list) or len(pair) != 2:
            raise InstanceError(f"graph[{i}]", "expected a pair [s, s_star]")
        points.append(_vector(pair[0], f"graph[{i}][0]", d))
        duals.append(_vector(pair[1], f"graph[{i}][1]", d))
    B = None
    if data.get("B") is not None:
        rows = data["B"]
        if not isinstance(rows, list) or len(rows) != d:
            got = len(rows) if isinstance(rows, list) else "non-list"
            raise InstanceError("B", f"dimension mismatch: expected {d} rows, got {got}")
        B = LinearOperator([_vector(r, f"B[{i}]", d) for i, r in enumerate(rows)])
    w = None
    if data.get("w_star") is not None:
        w = _vector(data["w_star"], "w_star", d)
    tol = defaults or Tolerances()
    if data.get("tolerances") is not None:
        tol = _tolerances(data["tolerances"], "tolerances", tol)
    og, messages = OperatorGraph(points, duals).normalized()
    return ExtensionInstance(og, n, B, w, tol, tuple(messages))


def instance_to_dict(instance):
    return {
        "dimension": instance.dimension,
        "graph": [[s.tolist(), t.tolist()] for s, t in instance.graph],
        "n": instance.n,
        "B": instance.B.matrix.tolist(),
        "w_star": instance.w_star.tolist(),
        "tolerances": instance.tolerances.to_dict(),
    }


def dump_instance(instance):
    return json.dumps(instance_to_dict(instance), indent=2, sort_keys=True)


def instance_hash(instance):
    canonical = json.dumps(instance_to_dict(instance), sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _plain(obj):
    """Convert numpy values to JSON types; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "+inf" if v > 0 else "-inf"
        return v
    return obj


_SPECIAL = {"+inf": math.inf, "-inf": -math.inf, "nan": math.nan}


def _restore(obj):
    if isinstance(obj, dict):
        return {k: _restore(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_restore(v) for v in obj]
    if isinstance(obj, str) and obj in _SPECIAL:
        return _SPECIAL[obj]
    return obj


def make_report(command, instance, verdict, witness=None, values=None, iterations=0,
                warnings=(), seed=0):
    """Assemble a report in the standard schema."""
    return {
        "command": command,
        "verdict": verdict,
        "witness": witness,
        "values": values or {},
        "iterations": int(iterations),
        "warnings": list(instance.warnings) + list(warnings),
        "tool_version": __version__,
        "seed": int(seed),
        "tolerances": instance.tolerances.to_dict(),
        "tolerance_semantics": FEAS_NOTE,
        "instance_hash": instance_hash(instance),
    }


def write_report(report):
    return json.dumps(_plain(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


def read_report(text):
    if hasattr(text, "read"):
        text = text.read()
    return _restore(json.loads(text))
