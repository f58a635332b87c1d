"""JSON readers and writers for states, witnesses and scalars."""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .exact_scalar import ApproxScalar, ExactScalar, as_scalar
from .permutation_algebra import LocalSymOp, ReplicaPermutation, WitnessOperator, compose
from .replica_state import ReplicaState

__all__ = [
    "scalar_from_json",
    "scalar_to_json",
    "state_from_json",
    "state_to_json",
    "witness_from_json",
    "witness_to_json",
    "load_json",
]


def load_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def scalar_to_json(x) -> dict:
    return as_scalar(x).to_json()


def scalar_from_json(obj):
    """Read an amplitude: a scalar dict, a rational string, or a plain number.

    Dicts with ``"exact": false`` (or only an ``"approx"`` field) become
    approximate scalars; ``"approx"`` may be a float or ``[re, im]``.
    """
    if isinstance(obj, bool):
        raise ValueError("booleans are not amplitudes")
    if isinstance(obj, (int, float, str)):
        return as_scalar(obj)
    if isinstance(obj, list):
        re, im = obj
        return as_scalar(complex(re, im))
    if not isinstance(obj, dict):
        raise ValueError(f"cannot read amplitude {obj!r}")
    exact_fields = {"num", "imag_num", "root_num"}
    if obj.get("exact") is False or not exact_fields & obj.keys():
        if "approx" not in obj:
            raise ValueError(f"amplitude {obj!r} has neither exact fields nor 'approx'")
        a = obj["approx"]
        return ApproxScalar(complex(*a) if isinstance(a, list) else complex(a))
    re = Fraction(int(obj.get("num", 0)), int(obj.get("den", 1)))
    im = Fraction(int(obj.get("imag_num", 0)), int(obj.get("imag_den", 1)))
    root = Fraction(int(obj.get("root_num", 1)), int(obj.get("root_den", 1)))
    if root < 0:
        raise ValueError("radicand must be nonnegative")
    return ExactScalar(re, im) * ExactScalar.sqrt(root)


def state_from_json(obj, name: str | None = None) -> ReplicaState:
    if "dims" not in obj or "terms" not in obj:
        raise ValueError("state JSON needs 'dims' and 'terms'")
    terms = {}
    for t in obj["terms"]:
        ket = tuple(int(k) for k in t["ket"])
        if ket in terms:
            raise ValueError(f"duplicate ket {list(ket)}")
        terms[ket] = scalar_from_json(t["amp"])
    state = ReplicaState(tuple(obj["dims"]), terms, name=name or obj.get("name"))
    if obj.get("normalize", False):
        state = state.normalized().renamed(state.name)
    return state


def state_to_json(state: ReplicaState) -> dict:
    if state.num_replicas != 1:
        raise ValueError("only single-copy states are serialized")
    out = {
        "dims": list(state.dims),
        "terms": [{"ket": list(k), "amp": a.to_json()} for k, a in state.items()],
        "normalize": False,
    }
    if state.name:
        out["name"] = state.name
    return out


_KINDS = {"antisym": "antisym", "sym": "sym", "pminus": "antisym"}


def _factor(obj) -> LocalSymOp:
    kind = obj.get("kind")
    if kind not in _KINDS:
        raise ValueError(f"unknown factor kind {kind!r}")
    reps = [int(r) for r in obj["replicas"]]
    if kind == "pminus" and len(reps) != 2:
        raise ValueError("a pminus factor acts on exactly two replicas")
    if min(reps, default=0) < 1 or int(obj["subsystem"]) < 1:
        raise ValueError("subsystem and replica indices are 1-based")
    return LocalSymOp(int(obj["subsystem"]) - 1, tuple(r - 1 for r in reps), _KINDS[kind])


def witness_from_json(
    obj,
    num_subsystems: int | None = None,
    num_replicas: int | None = None,
    *,
    allow_overlap: bool = False,
    name: str = "custom",
) -> WitnessOperator:
    """Build a witness from its factored or general JSON form.

    Factored files whose supports overlap are refused unless
    ``allow_overlap`` is set; then the factors are composed in file order
    (first listed acts first) into a general-form operator.
    """
    name = obj.get("name", name)
    n = obj.get("num_subsystems", num_subsystems)
    m = obj.get("num_replicas", num_replicas)
    if "factors" in obj:
        factors = [_factor(f) for f in obj["factors"]]
        if not factors:
            raise ValueError("empty factor list")
        if n is None:
            n = max(f.subsystem for f in factors) + 1
        if m is None:
            m = max(f.replicas[-1] for f in factors) + 1
        overlap = False
        seen = set()
        for f in factors:
            if seen & f.support:
                overlap = True
            seen |= f.support
        if not overlap:
            return WitnessOperator.from_factors(factors, n, m, name=name)
        if not allow_overlap:
            raise ValueError("factor supports overlap; use the reference engine to compose them in order")
        op = WitnessOperator.from_factors([factors[0]], n, m, name=name)
        for f in factors[1:]:
            op = compose(WitnessOperator.from_factors([f], n, m), op)
        return WitnessOperator(n, m, terms=op.general_terms(), name=name)
    if "terms" in obj:
        terms = []
        for t in obj["terms"]:
            perms = tuple(ReplicaPermutation.from_one_based([int(i) for i in p]) for p in t["perms"])
            terms.append((scalar_from_json(t["eta"]), perms))
        if not terms:
            raise ValueError("empty term list")
        n = len(terms[0][1]) if n is None else n
        m = terms[0][1][0].size if m is None else m
        return WitnessOperator(n, m, terms=terms, name=name)
    raise ValueError("witness JSON needs 'factors' or 'terms'")


def witness_to_json(op: WitnessOperator) -> dict:
    out = op.to_json()
    out["num_subsystems"] = op.num_subsystems
    out["num_replicas"] = op.num_replicas
    out["name"] = op.name
    return out


def read_state_file(path) -> ReplicaState:
    return state_from_json(load_json(path), name=Path(path).stem)
