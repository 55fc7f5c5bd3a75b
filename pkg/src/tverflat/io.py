"""JSON file formats for instances, certificates and point lists.

Numbers are written as strings: ``"p/q"`` for exact rationals and the
shortest round-trip decimal for floats. On reading, every number (string or
JSON literal) becomes an exact :class:`~fractions.Fraction`.
"""

from __future__ import annotations

import json
from fractions import Fraction

import numpy as np

from .certificate import Certificate, Instance
from .geometry import Subspace, exact_array, flat_from, to_fraction

__all__ = [
    "FormatError",
    "scalar_str",
    "dump_instance",
    "load_instance",
    "dump_certificate",
    "load_certificate",
    "load_points",
    "read_json",
]


class FormatError(ValueError):
    pass


def scalar_str(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _strs(arr):
    return [scalar_str(v) for v in arr]


def _dumps(obj: dict) -> str:
    # one top-level key per line keeps files diffable and hand-editable
    body = ",\n".join(f" {json.dumps(k)}: {json.dumps(v)}" for k, v in obj.items())
    return "{\n" + body + "\n}\n"


def read_json(text: str):
    try:
        return json.loads(text, parse_float=Fraction, parse_int=Fraction)
    except json.JSONDecodeError as err:
        raise FormatError(f"invalid JSON: {err}") from err


def _vector(obj, what):
    if not isinstance(obj, list):
        raise FormatError(f"{what} must be a list")
    try:
        return [to_fraction(v) for v in obj]
    except (TypeError, ValueError, ZeroDivisionError) as err:
        raise FormatError(f"{what}: {err}") from err


def _int(obj, what) -> int:
    if isinstance(obj, Fraction) and obj.denominator == 1:
        return int(obj)
    if isinstance(obj, int) and not isinstance(obj, bool):
        return obj
    raise FormatError(f"{what} must be an integer")


def instance_to_obj(inst: Instance) -> dict:
    return {"d": inst.d, "k": inst.k, "sets": [[_strs(p) for p in S] for S in inst.sets]}


def dump_instance(inst: Instance) -> str:
    return _dumps(instance_to_obj(inst))


def load_instance(text: str) -> Instance:
    obj = read_json(text)
    if not isinstance(obj, dict) or not {"d", "k", "sets"} <= obj.keys():
        raise FormatError('instance needs keys "d", "k", "sets"')
    d, k = _int(obj["d"], "d"), _int(obj["k"], "k")
    if not isinstance(obj["sets"], list):
        raise FormatError("sets must be a list")
    sets = []
    for i, S in enumerate(obj["sets"]):
        if not isinstance(S, list):
            raise FormatError(f"sets[{i}] must be a list of points")
        sets.append(exact_array([_vector(p, f"sets[{i}] point") for p in S]))
    return Instance(d, k, tuple(sets))


def certificate_to_obj(cert: Certificate) -> dict:
    B = cert.L.basis
    return {
        "bipartitions": [[list(map(int, a)), list(map(int, b))] for a, b in cert.bipartitions],
        "L_basis": [_strs(B[:, j]) for j in range(B.shape[1])],
        "p": _strs(cert.flat.anchor),
        "weights": [[_strs(wa), _strs(wb)] for wa, wb in cert.weights],
        "residual": repr(float(cert.residual)),
        "meta": {"strategy": str(cert.meta.get("strategy", "unknown"))},
    }


def dump_certificate(cert: Certificate) -> str:
    return _dumps(certificate_to_obj(cert))


def load_certificate(text: str, d: int | None = None) -> Certificate:
    """Parse a certificate; ``d`` is only needed when ``L_basis`` is empty."""
    obj = read_json(text)
    need = {"bipartitions", "L_basis", "p", "weights"}
    if not isinstance(obj, dict) or not need <= obj.keys():
        raise FormatError(f"certificate needs keys {sorted(need)}")
    try:
        parts = tuple(
            (tuple(_int(x, "index") for x in a), tuple(_int(x, "index") for x in b))
            for a, b in obj["bipartitions"]
        )
        weights = tuple(
            (exact_array(_vector(wa, "weights")), exact_array(_vector(wb, "weights")))
            for wa, wb in obj["weights"]
        )
    except (TypeError, ValueError) as err:
        raise FormatError(f"bad bipartitions/weights: {err}") from err
    cols = [_vector(c, "L_basis column") for c in obj["L_basis"]]
    if cols:
        if len({len(c) for c in cols}) != 1:
            raise FormatError("L_basis columns differ in length")
        B = exact_array(cols).T.copy()
    elif d is not None:
        B = np.empty((d, 0), dtype=object)
    else:
        raise FormatError("empty L_basis needs the ambient dimension")
    p = exact_array(_vector(obj["p"], "p"))
    try:
        flat = flat_from(Subspace(B), p)
    except ValueError as err:
        raise FormatError(str(err)) from err
    try:
        residual = float(obj.get("residual", "nan"))
    except (TypeError, ValueError) as err:
        raise FormatError(f"residual: {err}") from err
    meta = obj.get("meta")
    meta = dict(meta) if isinstance(meta, dict) else {}
    return Certificate(parts, flat, weights, residual, meta)


def load_points(text: str) -> np.ndarray:
    """Either ``{"points": [[...], ...]}`` or a bare list of points."""
    obj = read_json(text)
    if isinstance(obj, dict):
        obj = obj.get("points")
    if not isinstance(obj, list) or not obj:
        raise FormatError("expected a nonempty list of points")
    pts = [_vector(p, "point") for p in obj]
    if len({len(p) for p in pts}) != 1:
        raise FormatError("points differ in dimension")
    return exact_array(pts)
