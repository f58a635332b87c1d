"""Exact constructors for the named states.

Every state here has a single global radical, so all amplitudes stay in
:class:`~replicasym.exact_scalar.ExactScalar`.  Schmidt coefficients must
be given as exact rationals (ints, Fractions or strings such as ``"1/3"``);
floats are refused rather than silently rounded.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Sequence

from .exact_scalar import ExactScalar
from .permutation_algebra import signature
from .replica_state import ReplicaState

__all__ = [
    "parse_lambdas",
    "schmidt_state",
    "bell",
    "ghz",
    "w_qubit",
    "w3_threelevel",
    "aharonov",
    "aharonov_plus3",
    "biseparable",
    "product_state",
]


def parse_lambdas(lambdas: Sequence, allow_zero: bool = False) -> list[Fraction]:
    out = []
    for x in lambdas:
        if isinstance(x, float):
            raise ValueError(f"Schmidt coefficient {x!r} must be an exact rational, e.g. '1/3'")
        try:
            q = Fraction(x.strip()) if isinstance(x, str) else Fraction(x)
        except (ValueError, TypeError) as exc:
            raise ValueError(f"cannot read Schmidt coefficient {x!r}") from exc
        if q < 0 or (q == 0 and not allow_zero):
            raise ValueError(f"Schmidt coefficients must be {'nonnegative' if allow_zero else 'positive'}: {q}")
        out.append(q)
    if not out:
        raise ValueError("need at least one Schmidt coefficient")
    if sum(out) != 1:
        raise ValueError(f"Schmidt coefficients sum to {sum(out)}, not 1")
    return out


def schmidt_state(lambdas: Sequence, dim: int | None = None) -> ReplicaState:
    """``sum_i sqrt(lambda_i) |i i>`` on two subsystems.

    The local dimension is ``len(lambdas)`` unless a larger ``dim`` is given.
    """
    lam = parse_lambdas(lambdas)
    d = len(lam) if dim is None else dim
    if d < len(lam):
        raise ValueError(f"dimension {d} is smaller than the Schmidt rank {len(lam)}")
    name = "schmidt:" + ",".join(map(str, lam))
    return ReplicaState((d, d), {(i + 1, i + 1): ExactScalar.sqrt(q) for i, q in enumerate(lam)}, name=name)


def bell() -> ReplicaState:
    return schmidt_state([Fraction(1, 2), Fraction(1, 2)]).renamed("bell")


def ghz(n: int = 3, d: int = 2) -> ReplicaState:
    """``(1/sqrt d) sum_i |i>^{(x) n}``."""
    if n < 2 or d < 2:
        raise ValueError("ghz needs n >= 2 parties and d >= 2 levels")
    amp = ExactScalar.sqrt(Fraction(1, d))
    name = "ghz" if (n, d) == (3, 2) else (f"ghz{n}" if n == d else f"ghz:{n},{d}")
    return ReplicaState((d,) * n, {(i,) * n: amp for i in range(1, d + 1)}, name=name)


def w_qubit(n: int = 3) -> ReplicaState:
    """Uniform superposition of the single-excitation kets ``|2 1 ... 1>`` etc."""
    if n < 3:
        raise ValueError("w_qubit needs n >= 3")
    amp = ExactScalar.sqrt(Fraction(1, n))
    kets = {}
    for i in range(n):
        ket = [1] * n
        ket[i] = 2
        kets[tuple(ket)] = amp
    return ReplicaState((2,) * n, kets, name="w" if n == 3 else f"w:{n}")


def w3_threelevel() -> ReplicaState:
    amp = ExactScalar.sqrt(Fraction(1, 6))
    kets = [(2, 1, 1), (1, 2, 1), (1, 1, 2), (3, 2, 2), (2, 3, 2), (2, 2, 3)]
    return ReplicaState((3, 3, 3), {k: amp for k in kets}, name="w3")


def aharonov(n: int = 3) -> ReplicaState:
    """Totally antisymmetric ``n``-party ``n``-level state, ``eps_{i1..in}/sqrt(n!)``."""
    if n < 2:
        raise ValueError("aharonov needs n >= 2")
    amp = ExactScalar.sqrt(Fraction(1, math.factorial(n)))
    kets = {}
    for p in itertools.permutations(range(1, n + 1)):
        kets[p] = amp if signature(p) > 0 else -amp
    return ReplicaState((n,) * n, kets, name=f"chi{n}")


def aharonov_plus3() -> ReplicaState:
    amp = ExactScalar.sqrt(Fraction(1, 6))
    return ReplicaState((3, 3, 3), {p: amp for p in itertools.permutations((1, 2, 3))}, name="chi3plus")


def biseparable(lambdas: Sequence, phi_dim: int = 3, phi_index: int = 1) -> ReplicaState:
    """``sum_i sqrt(lambda_i) |i i phi>`` with spectator ``|phi> = |phi_index>``.

    Zero coefficients are allowed and simply drop their term.
    """
    lam = parse_lambdas(lambdas, allow_zero=True)
    if not 1 <= phi_index <= phi_dim:
        raise ValueError(f"phi_index {phi_index} outside 1..{phi_dim}")
    d = len(lam)
    kets = {(i + 1, i + 1, phi_index): ExactScalar.sqrt(q) for i, q in enumerate(lam) if q}
    name = "biseparable:" + ",".join(map(str, lam))
    return ReplicaState((d, d, phi_dim), kets, name=name)


def product_state(dims: Sequence[int], ket: Sequence[int]) -> ReplicaState:
    return ReplicaState(tuple(dims), {tuple(ket): ExactScalar(1)}, name="product:" + ",".join(map(str, ket)))
