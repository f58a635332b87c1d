"""Sparse states of ``M`` replicas of an ``N``-partite system.

Replicas are the rows of a grid and subsystems are its columns.  A basis
label is stored flat in row-major order, so position ``r * N + s`` holds
the local index of subsystem ``s`` in replica ``r`` (both 0-based here).
Local indices themselves are 1-based, matching kets such as ``|1 2 3>``.
A single-copy state is just the ``M = 1`` case, where the label is the ket.

Public functions take 1-based subsystem numbers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np
import sympy

from .errors import ShapeMismatchError
from .exact_scalar import ONE, ExactScalar, as_scalar, common_scale

__all__ = [
    "SystemShape",
    "ReplicaState",
    "tensor_power",
    "tensor_product",
    "inner_product",
    "norm_sq",
    "add_scaled",
    "reduced_density_rank",
    "rank_profile",
    "apply_local_operators",
]


@dataclass(frozen=True)
class SystemShape:
    dims: tuple[int, ...]
    replicas: int = 1

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if not self.dims:
            raise ValueError("need at least one subsystem")
        if any(d < 1 for d in self.dims):
            raise ValueError(f"local dimensions must be positive: {self.dims}")
        if self.replicas < 1:
            raise ValueError("need at least one replica")

    @property
    def num_subsystems(self) -> int:
        return len(self.dims)

    @property
    def label_length(self) -> int:
        return len(self.dims) * self.replicas


class ReplicaState:
    """Immutable sparse vector ``label -> amplitude``.

    Parameters
    ----------
    dims : sequence of int
        Local dimension of each subsystem.
    terms : mapping
        Flat labels (or, for convenience, tuples of rows) to amplitudes.
        Zero amplitudes are dropped and repeated labels are not allowed.
    replicas : int
        Number of replicas ``M``.
    name : str, optional
        Display label; ignored by equality and hashing.
    """

    __slots__ = ("shape", "_terms", "exact", "name")

    def __init__(self, dims, terms: Mapping = (), replicas: int = 1, *, name=None, _checked=False):
        self.name = name
        self.shape = dims if isinstance(dims, SystemShape) else SystemShape(tuple(dims), replicas)
        if _checked:
            self._terms = terms
        else:
            self._terms = {}
            items = terms.items() if isinstance(terms, Mapping) else terms
            for label, amp in items:
                label = self._normalize_label(label)
                if label in self._terms:
                    raise ValueError(f"duplicate label {label}")
                amp = as_scalar(amp)
                if not amp.is_zero():
                    self._terms[label] = amp
        self.exact = all(a.exact for a in self._terms.values())

    def _normalize_label(self, label) -> tuple[int, ...]:
        label = tuple(label)
        if label and isinstance(label[0], tuple):
            label = tuple(itertools.chain.from_iterable(label))
        if len(label) != self.shape.label_length:
            raise ShapeMismatchError(
                f"label {label} does not fit {self.shape.replicas} replicas of {self.shape.dims}"
            )
        n = self.shape.num_subsystems
        for pos, k in enumerate(label):
            if not 1 <= k <= self.shape.dims[pos % n]:
                raise ValueError(f"index {k} out of range in label {label}")
        return label

    # -- construction helpers ---------------------------------------------
    @classmethod
    def from_kets(cls, dims, kets: Mapping, normalize: bool = False) -> "ReplicaState":
        """Single-copy state from ``{ket tuple: amplitude}``."""
        state = cls(dims, kets, 1)
        return state.normalized() if normalize else state

    @classmethod
    def empty(cls, dims, replicas: int = 1) -> "ReplicaState":
        return cls(dims, {}, replicas)

    def normalized(self) -> "ReplicaState":
        n2 = norm_sq(self)
        if n2 == 0:
            raise ValueError("cannot normalize the zero state")
        if self.exact:
            inv = ExactScalar.sqrt(Fraction(1) / n2)
        else:
            inv = as_scalar(float(n2) ** -0.5)
        return self.scaled(inv)

    def scaled(self, c) -> "ReplicaState":
        c = as_scalar(c)
        return self._with({k: v * c for k, v in self._terms.items()})

    def renamed(self, name) -> "ReplicaState":
        return ReplicaState(self.shape, self._terms, name=name, _checked=True)

    def _with(self, terms: dict) -> "ReplicaState":
        return ReplicaState(self.shape, {k: v for k, v in terms.items() if not v.is_zero()}, _checked=True)

    # -- accessors ---------------------------------------------------------
    @property
    def dims(self) -> tuple[int, ...]:
        return self.shape.dims

    @property
    def num_subsystems(self) -> int:
        return self.shape.num_subsystems

    @property
    def num_replicas(self) -> int:
        return self.shape.replicas

    @property
    def terms(self) -> Mapping:
        return self._terms

    def items(self):
        """Terms in the canonical label order."""
        return sorted(self._terms.items())

    def amplitude(self, label):
        return self._terms.get(self._normalize_label(label), ExactScalar())

    def rows(self, label) -> tuple[tuple[int, ...], ...]:
        n = self.num_subsystems
        return tuple(tuple(label[r * n:(r + 1) * n]) for r in range(self.num_replicas))

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(sorted(self._terms))

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if not isinstance(other, ReplicaState):
            return NotImplemented
        return self.shape == other.shape and self._terms == other._terms

    def __hash__(self):
        return hash((self.shape, frozenset(self._terms.items())))

    def __repr__(self):
        body = " + ".join(f"({a})|{''.join(map(str, k))}>" for k, a in self.items()[:6])
        more = "" if len(self) <= 6 else f" + ... ({len(self)} terms)"
        return f"ReplicaState(dims={self.dims}, M={self.num_replicas}: {body or '0'}{more})"


def _check_same_shape(a: ReplicaState, b: ReplicaState):
    if a.shape != b.shape:
        raise ShapeMismatchError(f"shapes differ: {a.shape} vs {b.shape}")


def tensor_power(psi: ReplicaState, m: int) -> ReplicaState:
    """``psi^{(x) m}``: row ``r`` of each grid label is a ket of ``psi``."""
    if m < 1:
        raise ValueError("replica count must be positive")
    if psi.num_replicas != 1:
        raise ValueError("tensor_power expects a single-copy state")
    if m == 1:
        return psi
    kets = psi.items()
    factored = common_scale([a for _, a in kets])
    out = {}
    if factored is not None:
        scale, ints = factored
        total = scale ** m
        weights = list(zip((k for k, _ in kets), ints))
        for combo in itertools.product(weights, repeat=m):
            w = 1
            for _, x in combo:
                w *= x
            label = tuple(itertools.chain.from_iterable(k for k, _ in combo))
            out[label] = total * w
    else:
        for combo in itertools.product(kets, repeat=m):
            a = ONE
            for _, x in combo:
                a = a * x
            out[tuple(itertools.chain.from_iterable(k for k, _ in combo))] = a
    return ReplicaState(SystemShape(psi.dims, m), out, _checked=True)


def tensor_product(a: ReplicaState, b: ReplicaState) -> ReplicaState:
    """Single-copy ``a (x) b`` with the subsystems of ``b`` appended."""
    if a.num_replicas != 1 or b.num_replicas != 1:
        raise ValueError("tensor_product expects single-copy states")
    terms = {ka + kb: x * y for ka, x in a.terms.items() for kb, y in b.terms.items()}
    return ReplicaState(a.dims + b.dims, terms, 1)


def inner_product(a: ReplicaState, b: ReplicaState):
    """``<a|b>``, conjugate-linear in ``a``."""
    _check_same_shape(a, b)
    total = ExactScalar()
    small = a.terms if len(a) <= len(b) else b.terms
    for label in sorted(small):
        if label in a.terms and label in b.terms:
            total = total + a.terms[label].conjugate() * b.terms[label]
    return total


def norm_sq(a: ReplicaState):
    """Sum of ``|amplitude|^2``; a Fraction on the exact path."""
    if a.exact:
        total = Fraction(0)
        for v in a.terms.values():
            total += v.abs_sq()
        return total
    return float(sum(v.abs_sq() for _, v in a.items()))


def add_scaled(a: ReplicaState, c, b: ReplicaState) -> ReplicaState:
    """``a + c * b`` with cancelled terms removed."""
    _check_same_shape(a, b)
    c = as_scalar(c)
    out = dict(a.terms)
    if c.is_zero():
        return a
    for label, y in b.terms.items():
        x = out.get(label)
        out[label] = c * y if x is None else x + c * y
    return a._with(out)


# -- reduced density ranks ---------------------------------------------------

def _conditional_matrix(psi: ReplicaState, s: int):
    """Rows indexed by the local index of subsystem ``s``, columns by the rest."""
    cols = {}
    entries = {}
    for ket, amp in psi.items():
        rest = ket[:s] + ket[s + 1:]
        j = cols.setdefault(rest, len(cols))
        entries[(ket[s] - 1, j)] = amp
    return entries, len(cols)


def _balance_radicals(entries):
    """Row/column radical factors making every entry a Gaussian rational.

    Rank is unchanged by rescaling rows and columns, so this reduces the
    exact rank problem to rationals whenever such factors exist.
    """
    from .exact_scalar import squarefree_split

    def sqf(x):
        return squarefree_split(x)[1]

    adj_row, adj_col = {}, {}
    for (i, j), a in entries.items():
        adj_row.setdefault(i, []).append(j)
        adj_col.setdefault(j, []).append(i)
    row_f, col_f = {}, {}
    for start in adj_row:
        if start in row_f:
            continue
        row_f[start] = 1
        stack = [("r", start)]
        while stack:
            kind, idx = stack.pop()
            if kind == "r":
                for j in adj_row[idx]:
                    need = sqf(row_f[idx] * entries[(idx, j)].root)
                    if j not in col_f:
                        col_f[j] = need
                        stack.append(("c", j))
                    elif col_f[j] != need:
                        return None
            else:
                for i in adj_col[idx]:
                    need = sqf(col_f[idx] * entries[(i, idx)].root)
                    if i not in row_f:
                        row_f[i] = need
                        stack.append(("r", i))
                    elif row_f[i] != need:
                        return None
    return row_f, col_f


def reduced_density_rank(psi: ReplicaState, subsystem: int) -> int:
    """Rank of the reduced density matrix of one subsystem (1-based).

    Equals the rank of the ``d_s x (rest)`` coefficient matrix.  On the
    exact path the matrix is rescaled to Gaussian rationals and its rank is
    computed exactly; otherwise a float SVD rank is used.
    """
    if psi.num_replicas != 1:
        raise ShapeMismatchError("reduced_density_rank expects a single-copy state")
    if not 1 <= subsystem <= psi.num_subsystems:
        raise ValueError(f"subsystem {subsystem} out of range")
    s = subsystem - 1
    if not psi:
        return 0
    entries, ncols = _conditional_matrix(psi, s)
    d = psi.dims[s]
    balanced = _balance_radicals(entries) if psi.exact else None
    if balanced is not None:
        row_f, col_f = balanced
        # Real embedding [[A, -B], [B, A]] has twice the complex rank.
        mat = sympy.zeros(2 * d, 2 * ncols)
        for (i, j), a in entries.items():
            x = a * ExactScalar.sqrt(row_f[i]) * ExactScalar.sqrt(col_f[j])
            assert x.root == 1
            re = sympy.Rational(x.re.numerator, x.re.denominator)
            im = sympy.Rational(x.im.numerator, x.im.denominator)
            mat[i, j] = re
            mat[i + d, j + ncols] = re
            mat[i, j + ncols] = -im
            mat[i + d, j] = im
        return mat.rank() // 2
    mat = np.zeros((d, ncols), dtype=complex)
    for (i, j), a in entries.items():
        mat[i, j] = complex(a)
    return int(np.linalg.matrix_rank(mat, tol=1e-10))


def rank_profile(psi: ReplicaState) -> tuple[int, ...]:
    return tuple(reduced_density_rank(psi, s + 1) for s in range(psi.num_subsystems))


# -- local operators ---------------------------------------------------------

def apply_local_operators(state: ReplicaState, ops: Mapping[int, Iterable]) -> ReplicaState:
    """Apply ``F_s^{(x) M}`` for each 1-based subsystem ``s`` in ``ops``.

    ``ops[s]`` is a ``d_s x d_s`` matrix (nested sequences of scalars) with
    ``F|k> = sum_j F[j][k] |j>``.  Subsystems not listed are left alone.
    """
    n = state.num_subsystems
    current = dict(state.terms)
    for s, mat in sorted(ops.items()):
        d = state.dims[s - 1]
        mat = [[as_scalar(x) for x in row] for row in mat]
        if len(mat) != d or any(len(row) != d for row in mat):
            raise ShapeMismatchError(f"operator for subsystem {s} must be {d}x{d}")
        columns = [[(j + 1, mat[j][k]) for j in range(d) if not mat[j][k].is_zero()] for k in range(d)]
        for r in range(state.num_replicas):
            pos = r * n + (s - 1)
            nxt = {}
            for label, amp in current.items():
                head, tail = label[:pos], label[pos + 1:]
                for j, f in columns[label[pos] - 1]:
                    key = head + (j,) + tail
                    v = f * amp
                    prev = nxt.get(key)
                    nxt[key] = v if prev is None else prev + v
            current = {k: v for k, v in nxt.items() if not v.is_zero()}
    return ReplicaState(state.shape, current, _checked=True)
