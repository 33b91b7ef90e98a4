"""JSON form of scenarios. Complex numbers are ``[re, im]`` pairs.

Single party::

    {"d", "n", "m", "dynamics", "padding",
     "psi": [[re, im], ...],
     "measurements": [[vector_0, ..., vector_{d-1}] for each x],
     "ops": [{"kind": "identity"} | {"kind": "block", "blocks": [...]}
             | {"kind": "channel", "kraus": [...]} | {"kind": "unitary", "matrix": ...}]}

Bipartite documents add ``"type": "bipartite"`` and carry ``d_B``, ``psi``,
``alice`` (two measurements as above) and ``bob[y][b]`` projector matrices.
Matrices are lists of rows.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .qlinalg import ValidationError
from .scenario import BLOCK, CHANNEL, IDENTITY, UNITARY, FriendMeasurement, Scenario, SuperObserverOp


def _c(z) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def _vec(v) -> list:
    return [_c(z) for z in np.asarray(v).ravel()]


def _mat(m) -> list:
    return [_vec(row) for row in np.asarray(m)]


def _parse_complex_array(data, ndim: int, what: str) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{what}: expected nested [re, im] pairs") from exc
    if arr.ndim != ndim + 1 or arr.shape[-1] != 2:
        raise ValidationError(f"{what}: expected {ndim}-D array of [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def _measurement_to_list(meas: FriendMeasurement) -> list:
    return [_vec(meas.vector(i)) for i in range(meas.d)]


def _measurement_from_list(data, what: str) -> FriendMeasurement:
    vectors = _parse_complex_array(data, 2, what)
    return FriendMeasurement(vectors.T)


def op_to_dict(op: SuperObserverOp) -> dict:
    if op.kind == BLOCK:
        return {"kind": BLOCK, "blocks": [_mat(b) for b in op.blocks]}
    if op.kind == CHANNEL:
        return {"kind": CHANNEL, "kraus": [_mat(k) for k in op.kraus]}
    if op.kind == UNITARY:
        return {"kind": UNITARY, "matrix": _mat(op.matrix)}
    return {"kind": IDENTITY}


def op_from_dict(data: dict, w: int = 0) -> SuperObserverOp:
    kind = data.get("kind")
    if kind == IDENTITY:
        return SuperObserverOp.identity()
    if kind == BLOCK:
        return SuperObserverOp.block([_parse_complex_array(b, 2, f"op {w} block") for b in data["blocks"]])
    if kind == CHANNEL:
        return SuperObserverOp.channel([_parse_complex_array(k, 2, f"op {w} kraus") for k in data["kraus"]])
    if kind == UNITARY:
        return SuperObserverOp.unitary(_parse_complex_array(data["matrix"], 2, f"op {w} matrix"))
    raise ValidationError(f"op {w}: unknown kind {kind!r}")


def to_dict(obj) -> dict:
    from .bipartite import BipartiteScenario

    if isinstance(obj, BipartiteScenario):
        return {
            "type": "bipartite",
            "d_B": obj.d_B,
            "dynamics": obj.dynamics,
            "psi": _vec(obj.psi),
            "alice": [_measurement_to_list(m) for m in obj.alice],
            "bob": [[_mat(obj.bob[y, b]) for b in range(2)] for y in range(2)],
            "ops": [op_to_dict(op) for op in obj.ops],
        }
    if isinstance(obj, Scenario):
        return {
            "d": obj.d,
            "n": obj.n,
            "m": obj.m,
            "dynamics": obj.dynamics,
            "padding": obj.padding,
            "psi": _vec(obj.psi),
            "measurements": [_measurement_to_list(m) for m in obj.measurements],
            "ops": [op_to_dict(op) for op in obj.ops],
        }
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def from_dict(data: dict):
    """Rebuild a ``Scenario`` or ``BipartiteScenario``; every invariant is re-validated."""
    if not isinstance(data, dict):
        raise ValidationError("scenario document must be a JSON object")
    try:
        ops = [op_from_dict(op, w) for w, op in enumerate(data["ops"])]
        psi = _parse_complex_array(data["psi"], 1, "psi")
        if data.get("type") == "bipartite":
            from .bipartite import BipartiteScenario

            alice = [_measurement_from_list(m, f"alice measurement {x}") for x, m in enumerate(data["alice"])]
            bob = np.array(
                [[_parse_complex_array(p, 2, f"bob projector {y},{b}") for b, p in enumerate(row)]
                 for y, row in enumerate(data["bob"])]
            )
            return BipartiteScenario(psi, tuple(alice), bob, tuple(ops), data.get("dynamics", "NoM"))
        meas = [_measurement_from_list(m, f"measurement {x}") for x, m in enumerate(data["measurements"])]
        d = int(data.get("d", psi.size))
        n = int(data.get("n", len(meas)))
        if "m" in data and int(data["m"]) != len(ops):
            raise ValidationError(f"m={data['m']} does not match {len(ops)} ops")
        return Scenario(d, n, psi, tuple(meas), tuple(ops), data.get("dynamics", "NoM"), int(data.get("padding", 0)))
    except KeyError as exc:
        raise ValidationError(f"missing field {exc.args[0]!r}") from exc


def dumps(obj, **kwargs) -> str:
    return json.dumps(to_dict(obj), **kwargs)


def dump(obj, path) -> None:
    Path(path).write_text(dumps(obj, indent=1) + "\n")


def load(path):
    """Read a scenario file. ``OSError`` propagates; bad JSON becomes ``ValidationError``."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON: {exc}") from exc
    return from_dict(data)
