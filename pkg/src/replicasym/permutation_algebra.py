"""Replica permutations, witness operators and the reference engine.

A permutation acts on the replicas of one subsystem: applying ``pi`` moves
the entry of replica ``i`` to replica ``pi(i)``.  A witness operator is a
linear combination of tensor products of such permutations, one per
subsystem.  It is kept either *factored*, as a list of (anti)symmetrizing
projectors on disjoint (subsystem, replica-subset) supports, or *general*,
as an explicit list of ``(eta, perms)`` terms.

The reference engine applies an operator by full expansion and is the
oracle that the canonical engine is checked against.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from operator import itemgetter
from typing import Callable, Sequence

from .errors import ShapeMismatchError
from .exact_scalar import ExactScalar, as_scalar, common_scale
from .replica_state import ReplicaState, apply_local_operators

__all__ = [
    "ReplicaPermutation",
    "LocalSymOp",
    "WitnessOperator",
    "signature",
    "apply_permutation",
    "apply_witness_reference",
    "commutes_with_local_powers_check",
    "compose",
]

KINDS = ("antisym", "sym")


@dataclass(frozen=True, order=True)
class ReplicaPermutation:
    """Bijection of the replica positions ``0..M-1``; ``images[i] = pi(i)``."""

    images: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(self.images))
        if sorted(self.images) != list(range(len(self.images))):
            raise ValueError(f"not a permutation: {self.images}")

    @classmethod
    def identity(cls, m: int) -> "ReplicaPermutation":
        return cls(tuple(range(m)))

    @classmethod
    def from_one_based(cls, images: Sequence[int]) -> "ReplicaPermutation":
        return cls(tuple(i - 1 for i in images))

    @classmethod
    def transposition(cls, m: int, a: int, b: int) -> "ReplicaPermutation":
        """Swap of replicas ``a`` and ``b`` (1-based) among ``m``."""
        img = list(range(m))
        img[a - 1], img[b - 1] = img[b - 1], img[a - 1]
        return cls(tuple(img))

    @classmethod
    def embed(cls, m: int, subset: Sequence[int], local: Sequence[int]) -> "ReplicaPermutation":
        """Permutation ``local`` of the (0-based) ``subset``, fixing the rest."""
        img = list(range(m))
        for i, j in enumerate(local):
            img[subset[i]] = subset[j]
        return cls(tuple(img))

    @property
    def size(self) -> int:
        return len(self.images)

    def one_based(self) -> list[int]:
        return [i + 1 for i in self.images]

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.images))

    def moved(self) -> frozenset[int]:
        return frozenset(i for i, j in enumerate(self.images) if i != j)

    def inverse(self) -> "ReplicaPermutation":
        inv = [0] * len(self.images)
        for i, j in enumerate(self.images):
            inv[j] = i
        return ReplicaPermutation(tuple(inv))

    def __mul__(self, other: "ReplicaPermutation") -> "ReplicaPermutation":
        """``(self * other)(i) = self(other(i))``: apply ``other`` first."""
        return ReplicaPermutation(tuple(self.images[j] for j in other.images))

    def signature(self) -> int:
        return signature(self)


def signature(perm) -> int:
    """Parity of a permutation (or of the sorting of a sequence of distinct items)."""
    seq = list(perm.images if isinstance(perm, ReplicaPermutation) else perm)
    sign = 1
    seen = [False] * len(seq)
    # Sorting permutation parity: n - (#cycles).
    order = sorted(range(len(seq)), key=seq.__getitem__)
    for i in range(len(seq)):
        if seen[i]:
            continue
        j = i
        length = 0
        while not seen[j]:
            seen[j] = True
            j = order[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


@dataclass(frozen=True)
class LocalSymOp:
    """Uniform (anti)symmetrizer on a replica subset of one subsystem.

    ``subsystem`` and ``replicas`` are 0-based.  A two-replica ``antisym`` is
    the singlet projector ``(1 - swap)/2``.
    """

    subsystem: int
    replicas: tuple[int, ...]
    kind: str

    def __post_init__(self):
        reps = tuple(sorted(self.replicas))
        object.__setattr__(self, "replicas", reps)
        if self.kind not in KINDS:
            raise ValueError(f"unknown projector kind {self.kind!r}")
        if len(set(reps)) != len(reps) or not reps:
            raise ValueError(f"bad replica subset {self.replicas}")
        if reps[0] < 0 or self.subsystem < 0:
            raise ValueError("indices are 0-based and nonnegative")

    @property
    def order_key(self):
        return (self.subsystem, self.replicas[0])

    @property
    def support(self) -> frozenset[tuple[int, int]]:
        return frozenset((self.subsystem, r) for r in self.replicas)

    def expansion(self, m: int) -> list[tuple[ExactScalar, ReplicaPermutation]]:
        """``(coefficient, permutation)`` pairs embedded in ``m`` replicas."""
        if self.replicas[-1] >= m:
            raise ShapeMismatchError(f"factor on replicas {self.replicas} needs more than {m} replicas")
        k = len(self.replicas)
        c = Fraction(1, math.factorial(k))
        out = []
        for local in itertools.permutations(range(k)):
            sgn = signature(local) if self.kind == "antisym" else 1
            out.append((ExactScalar(c * sgn), ReplicaPermutation.embed(m, self.replicas, local)))
        return out

    def to_json(self) -> dict:
        kind = "pminus" if self.kind == "antisym" and len(self.replicas) == 2 else self.kind
        return {"subsystem": self.subsystem + 1, "replicas": [r + 1 for r in self.replicas], "kind": kind}


@dataclass(frozen=True)
class WitnessOperator:
    """Linear combination of per-subsystem replica permutations.

    Exactly one of ``factors`` (factored projector form) or ``terms``
    (general form) is set.  General terms are ``(eta, perms)`` with one
    :class:`ReplicaPermutation` per subsystem.
    """

    num_subsystems: int
    num_replicas: int
    factors: tuple[LocalSymOp, ...] | None = None
    terms: tuple[tuple[object, tuple[ReplicaPermutation, ...]], ...] | None = None
    name: str = "custom"
    notes: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if (self.factors is None) == (self.terms is None):
            raise ValueError("give exactly one of factors or terms")
        if self.factors is not None:
            facs = tuple(sorted(self.factors, key=lambda f: f.order_key))
            object.__setattr__(self, "factors", facs)
            seen = set()
            for f in facs:
                if f.subsystem >= self.num_subsystems:
                    raise ShapeMismatchError(f"factor on subsystem {f.subsystem + 1} of {self.num_subsystems}")
                if f.replicas[-1] >= self.num_replicas:
                    raise ShapeMismatchError(f"factor on replicas {f.replicas} needs more than {self.num_replicas}")
                if seen & f.support:
                    raise ValueError("factor supports overlap")
                seen |= f.support
        else:
            merged: dict[tuple, object] = {}
            for eta, perms in self.terms:
                perms = tuple(p if isinstance(p, ReplicaPermutation) else ReplicaPermutation(p) for p in perms)
                if len(perms) != self.num_subsystems or any(p.size != self.num_replicas for p in perms):
                    raise ShapeMismatchError("term does not match the operator shape")
                eta = as_scalar(eta)
                merged[perms] = merged[perms] + eta if perms in merged else eta
            terms = tuple(sorted(((e, p) for p, e in merged.items() if not e.is_zero()), key=lambda t: t[1]))
            object.__setattr__(self, "terms", terms)

    @property
    def is_factored(self) -> bool:
        return self.factors is not None

    @classmethod
    def from_factors(cls, factors, num_subsystems, num_replicas, name="custom", notes=()):
        return cls(num_subsystems, num_replicas, factors=tuple(factors), name=name, notes=tuple(notes))

    @classmethod
    def identity(cls, num_subsystems: int, num_replicas: int) -> "WitnessOperator":
        e = ReplicaPermutation.identity(num_replicas)
        return cls(num_subsystems, num_replicas, terms=((ExactScalar(1), (e,) * num_subsystems),), name="identity")

    def general_terms(self):
        """Explicit ``(eta, perms)`` list; expands the factored form."""
        if self.terms is not None:
            return self.terms
        return self.expand().terms

    def expand(self) -> "WitnessOperator":
        if self.terms is not None:
            return self
        m, n = self.num_replicas, self.num_subsystems
        e = ReplicaPermutation.identity(m)
        acc = {(e,) * n: ExactScalar(1)}
        for f in self.factors:
            nxt = {}
            for perms, eta in acc.items():
                for c, p in f.expansion(m):
                    new = list(perms)
                    new[f.subsystem] = p * new[f.subsystem]
                    key = tuple(new)
                    v = eta * c
                    nxt[key] = nxt[key] + v if key in nxt else v
            acc = nxt
        return WitnessOperator(n, m, terms=tuple((eta, p) for p, eta in acc.items()), name=self.name, notes=self.notes)

    def term_set(self) -> frozenset:
        return frozenset((p, e) for e, p in self.general_terms())

    def same_operator(self, other: "WitnessOperator") -> bool:
        """Equality as linear operators, i.e. of the expanded term sets."""
        return (
            self.num_subsystems == other.num_subsystems
            and self.num_replicas == other.num_replicas
            and self.term_set() == other.term_set()
        )

    def to_json(self) -> dict:
        if self.factors is not None:
            return {"factors": [f.to_json() for f in self.factors]}
        return {
            "terms": [{"eta": as_scalar(e).to_json(), "perms": [p.one_based() for p in perms]} for e, perms in self.terms]
        }


# -- reference engine --------------------------------------------------------

def _position_map(n: int, m: int, subsystem: int, perm: ReplicaPermutation) -> list[int]:
    """Source position for each flat position after applying ``perm`` on ``subsystem``."""
    src = list(range(n * m))
    for i, j in enumerate(perm.images):
        src[j * n + subsystem] = i * n + subsystem
    return src


def _getter(src: list[int]) -> Callable:
    if len(src) == 1:
        return lambda label: label
    if src == list(range(len(src))):
        return lambda label: label
    return itemgetter(*src)


def _check_op_state(op: WitnessOperator, state: ReplicaState):
    if op.num_subsystems != state.num_subsystems or op.num_replicas != state.num_replicas:
        raise ShapeMismatchError(
            f"operator acts on {op.num_replicas} replicas of {op.num_subsystems} subsystems, "
            f"state has {state.num_replicas} replicas of {state.num_subsystems}"
        )


def apply_permutation(state: ReplicaState, subsystem: int, perm: ReplicaPermutation) -> ReplicaState:
    """Permute the replicas of one (1-based) subsystem; amplitudes unchanged."""
    if not 1 <= subsystem <= state.num_subsystems:
        raise ValueError(f"subsystem {subsystem} out of range")
    if perm.size != state.num_replicas:
        raise ShapeMismatchError("permutation size differs from replica count")
    g = _getter(_position_map(state.num_subsystems, state.num_replicas, subsystem - 1, perm))
    return ReplicaState(state.shape, {g(k): v for k, v in state.terms.items()}, _checked=True)


def _linear_pass(terms: dict, moves):
    """One linear map ``label -> sum_c c * |g(label)>`` with pruning."""
    acc = {}
    get = acc.get
    for label, w in terms.items():
        for c, g in moves:
            key = g(label)
            prev = get(key)
            acc[key] = c * w if prev is None else prev + c * w
    return {k: v for k, v in acc.items() if v}


def _apply_moves(state_terms: dict, passes):
    """Run several linear passes, on integers when every pass allows it."""
    labels = list(state_terms)
    split = common_scale(state_terms[k] for k in labels)
    pass_splits = [common_scale(c for c, _ in moves) for moves in passes]
    if split is not None and all(ps is not None for ps in pass_splits):
        total, ints = split
        cur = dict(zip(labels, ints))
        for moves, (cs, cints) in zip(passes, pass_splits):
            total = total * cs
            cur = _linear_pass(cur, [(ci, g) for ci, (_, g) in zip(cints, moves)])
        return {k: total * w for k, w in cur.items()}
    cur = dict(state_terms)
    for moves in passes:
        cur = _linear_pass(cur, moves)
    return cur


def apply_witness_reference(op: WitnessOperator, state: ReplicaState) -> ReplicaState:
    """Fully expanded action of ``op`` on a replica state.

    Factored operators are applied factor by factor in ascending
    (subsystem, first replica) order; general ones term by term.
    """
    _check_op_state(op, state)
    n, m = op.num_subsystems, op.num_replicas
    if op.is_factored:
        passes = [
            [(c, _getter(_position_map(n, m, f.subsystem, p))) for c, p in f.expansion(m)]
            for f in op.factors
        ]
    else:
        moves = []
        for eta, perms in op.terms:
            src = list(range(n * m))
            for s, p in enumerate(perms):
                for i, j in enumerate(p.images):
                    src[j * n + s] = i * n + s
            moves.append((eta, _getter(src)))
        passes = [moves]
    out = _apply_moves(state.terms, passes)
    return ReplicaState(state.shape, {k: v for k, v in out.items() if not v.is_zero()}, _checked=True)


def compose(op_a: WitnessOperator, op_b: WitnessOperator) -> WitnessOperator:
    """General-form product ``op_a . op_b`` (``op_b`` acts first)."""
    if (op_a.num_subsystems, op_a.num_replicas) != (op_b.num_subsystems, op_b.num_replicas):
        raise ShapeMismatchError("operators act on different shapes")
    acc = {}
    for ea, pa in op_a.general_terms():
        for eb, pb in op_b.general_terms():
            key = tuple(x * y for x, y in zip(pa, pb))
            v = as_scalar(ea) * as_scalar(eb)
            acc[key] = acc[key] + v if key in acc else v
    return WitnessOperator(
        op_a.num_subsystems,
        op_a.num_replicas,
        terms=tuple((e, p) for p, e in acc.items()),
        name=f"{op_a.name}*{op_b.name}",
    )


# -- commutation with local powers ---------------------------------------------

def _random_rational_matrix(rng: random.Random, d: int, lo=-3, hi=3):
    return [[Fraction(rng.randint(lo, hi), rng.randint(1, 3)) for _ in range(d)] for _ in range(d)]


def random_sparse_state(rng: random.Random, dims, replicas: int, nterms: int, complex_amps=False) -> ReplicaState:
    """Random state with small rational (optionally Gaussian) amplitudes."""
    n = len(dims)
    terms = {}
    for _ in range(nterms):
        label = tuple(rng.randint(1, dims[pos % n]) for pos in range(n * replicas))
        re = Fraction(rng.randint(-4, 4), rng.randint(1, 4))
        im = Fraction(rng.randint(-4, 4), rng.randint(1, 4)) if complex_amps else 0
        terms[label] = ExactScalar(re, im)
    return ReplicaState(dims, terms, replicas)


def _random_elementary_matrix(rng: random.Random, d: int):
    """Random diagonal times ``1 + c E_ij``; such products generate GL(d, Q)."""
    diag = [Fraction(rng.choice((-3, -2, -1, 1, 2, 3)), rng.randint(1, 3)) for _ in range(d)]
    i, j = rng.sample(range(d), 2) if d > 1 else (0, 0)
    c = Fraction(rng.choice((-2, -1, 1, 2)), rng.randint(1, 3))
    mat = [[diag[r] if r == col else Fraction(0) for col in range(d)] for r in range(d)]
    if i != j:
        mat[i][j] = diag[i] * c
    return mat


def commutes_with_local_powers_check(
    op,
    trials: int = 20,
    seed: int = 0,
    dims: Sequence[int] | None = None,
    num_subsystems: int | None = None,
    num_replicas: int | None = None,
    nterms: int = 3,
    max_expansion: int = 2000,
) -> bool:
    """Randomized exact check that ``A F^{(x) M} x == F^{(x) M} A x``.

    ``op`` is a :class:`WitnessOperator` or any callable on replica states
    (the latter needs ``num_subsystems``/``num_replicas``).  Each trial draws
    a random sparse state and random rational local matrices.  A dense
    ``F_s`` expands a label into ``d_s^M`` labels; while the product over
    subsystems exceeds ``max_expansion`` the largest dense factor is
    swapped for a diagonal-times-elementary matrix (at most ``2^M``
    labels), and as a last resort subsystems are left out.  Commuting with
    those generators and with each single-subsystem power implies
    commuting with every product ``(F_1 (x) ... (x) F_N)^{(x) M}``.
    """
    if isinstance(op, WitnessOperator):
        n, m = op.num_subsystems, op.num_replicas

        def act(x):
            return apply_witness_reference(op, x)
    else:
        n, m = num_subsystems, num_replicas
        act = op
    if n is None or m is None:
        raise ValueError("need the operator shape")
    dims = tuple(dims) if dims is not None else (2,) * n
    rng = random.Random(seed)
    for _ in range(trials):
        x = random_sparse_state(rng, dims, m, nterms, complex_amps=rng.random() < 0.3)
        growth = {s: dims[s - 1] ** m for s in range(1, n + 1)}
        dense = set(growth)
        while math.prod(growth.values()) > max_expansion:
            big = [s for s in sorted(dense) if growth[s] > 2**m]
            if big:
                s = max(big, key=lambda t: growth[t])
                dense.discard(s)
                growth[s] = 2**m
            elif len(growth) > 1:
                s = rng.choice(sorted(growth))
                del growth[s]
                dense.discard(s)
            else:
                break
        ops = {
            s: _random_rational_matrix(rng, dims[s - 1]) if s in dense else _random_elementary_matrix(rng, dims[s - 1])
            for s in sorted(growth)
        }
        lhs = act(apply_local_operators(x, ops))
        rhs = apply_local_operators(act(x), ops)
        if lhs != rhs:
            return False
    return True
