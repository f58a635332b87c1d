"""Fast evaluation of factored projector witnesses.

An antisymmetrizer on ``k`` replicas sends a column segment ``t`` to
``sgn(t) * A|sorted(t)>`` and kills it when ``t`` repeats an entry; a
symmetrizer sends it to ``S|sorted(t)>``.  Instead of expanding ``k!``
permutations per factor, every projected segment is replaced by its
canonical content.  Projected vectors with different contents (or
different untouched entries) are orthogonal, so after merging the squared
norm is a sum of ``|amplitude|^2`` times closed-form block norms:
``1/k!`` for an antisymmetric block and ``prod(mult!)/k!`` for a
symmetric one.

:func:`evaluate_fast` builds the tensor power one replica at a time.  A
partial term dies as soon as an antisymmetric block sees a repeated
entry, and partial terms with identical partial contents are merged on
the fly; the parity of the sort is tracked incrementally, which is what
makes the early merge legitimate.
"""

from __future__ import annotations

import bisect
import itertools
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import NotFactoredError, ResourceCapExceeded, ShapeMismatchError
from .exact_scalar import ONE, ExactScalar, common_scale, zero_status
from .permutation_algebra import WitnessOperator, signature
from .replica_state import ReplicaState, tensor_power

__all__ = [
    "DEFAULT_CAP",
    "SymBlock",
    "BlockTerm",
    "TermStats",
    "FastEvaluation",
    "canonicalize",
    "block_norm_sq",
    "expand_block_terms",
    "evaluate_fast",
]

DEFAULT_CAP = 10**8


@dataclass(frozen=True, order=True)
class SymBlock:
    """Canonical representative of one projected column segment.

    ``subsystem`` and ``replicas`` are 0-based.  ``content`` is sorted;
    ``sign`` is the parity of the sort for antisymmetric blocks (always +1
    for symmetric ones, and +1 once absorbed into a :class:`BlockTerm`).
    """

    subsystem: int
    replicas: tuple[int, ...]
    kind: str
    content: tuple[int, ...]
    sign: int = 1

    @classmethod
    def from_segment(cls, subsystem, replicas, kind, values) -> "SymBlock | None":
        values = tuple(values)
        if kind == "antisym":
            if len(set(values)) != len(values):
                return None
            return cls(subsystem, tuple(replicas), kind, tuple(sorted(values)), signature(values))
        return cls(subsystem, tuple(replicas), kind, tuple(sorted(values)), 1)

    def norm_sq(self) -> Fraction:
        k = len(self.content)
        if self.kind == "antisym":
            return Fraction(1, math.factorial(k))
        mult = math.prod(math.factorial(c) for c in Counter(self.content).values())
        return Fraction(mult, math.factorial(k))

    def unsigned(self) -> "SymBlock":
        return SymBlock(self.subsystem, self.replicas, self.kind, self.content, 1)


@dataclass(frozen=True)
class BlockTerm:
    """``amplitude * (x)_blocks P|content> (x) |untouched entries>``.

    ``untouched`` lists ``((subsystem, replica), value)`` for every grid
    position outside the projected segments, 0-based positions.
    """

    amplitude: object
    blocks: tuple[SymBlock, ...]
    untouched: tuple[tuple[tuple[int, int], int], ...]

    @property
    def key(self):
        return (tuple(b.content for b in self.blocks), tuple(v for _, v in self.untouched))

    def norm_sq(self):
        n2 = self.amplitude.abs_sq()
        for b in self.blocks:
            n2 *= b.norm_sq()
        return n2


@dataclass
class TermStats:
    enumerated: int = 0
    pruned: int = 0
    surviving: int = 0
    blocks: int = 0
    max_live: int = 0

    def to_json(self) -> dict:
        return {"enumerated": self.enumerated, "pruned": self.pruned, "surviving": self.surviving, "blocks": self.blocks}

    def merge(self, other: "TermStats"):
        self.enumerated += other.enumerated
        self.pruned += other.pruned
        self.surviving += other.surviving
        self.max_live = max(self.max_live, other.max_live)


@dataclass
class FastEvaluation:
    norm_sq: object
    status: str
    exact: bool
    stats: TermStats
    terms: list

    @property
    def is_zero(self) -> bool:
        return self.status == "zero"


def _require_factored(op: WitnessOperator):
    if not op.is_factored:
        raise NotFactoredError("the canonical engine evaluates factored witnesses only")


def _untouched_positions(op: WitnessOperator) -> list[tuple[int, int]]:
    covered = set()
    for f in op.factors:
        covered |= f.support
    return [(s, r) for r in range(op.num_replicas) for s in range(op.num_subsystems) if (s, r) not in covered]


def _finish(op: WitnessOperator, merged: dict, free_positions) -> list[BlockTerm]:
    out = []
    for (contents, free), amp in sorted(merged.items(), key=lambda kv: kv[0]):
        if amp.is_zero():
            continue
        blocks = tuple(SymBlock(f.subsystem, f.replicas, f.kind, c) for f, c in zip(op.factors, contents))
        out.append(BlockTerm(amp, blocks, tuple(zip(free_positions, free))))
    return out


def canonicalize(state, op: WitnessOperator) -> list[BlockTerm]:
    """Canonical block terms of ``op`` applied to ``state``.

    ``state`` is a :class:`ReplicaState` or an already canonical sequence
    of :class:`BlockTerm` (for which this is the identity).
    """
    _require_factored(op)
    n, m = op.num_subsystems, op.num_replicas
    free_positions = _untouched_positions(op)
    if not isinstance(state, ReplicaState):
        merged = {}
        for t in state:
            key = t.key
            merged[key] = merged[key] + t.amplitude if key in merged else t.amplitude
        return _finish(op, merged, free_positions)
    if state.num_subsystems != n or state.num_replicas != m:
        raise ShapeMismatchError("operator and state shapes differ")
    merged = {}
    for label, amp in state.items():
        contents = []
        sign = 1
        for f in op.factors:
            block = SymBlock.from_segment(f.subsystem, f.replicas, f.kind, (label[r * n + f.subsystem] for r in f.replicas))
            if block is None:
                break
            sign *= block.sign
            contents.append(block.content)
        else:
            key = (tuple(contents), tuple(label[r * n + s] for s, r in free_positions))
            v = amp if sign > 0 else -amp
            merged[key] = merged[key] + v if key in merged else v
    return _finish(op, merged, free_positions)


def block_norm_sq(terms: Iterable[BlockTerm]):
    """Squared norm of the state represented by merged block terms."""
    terms = list(terms)
    if all(t.amplitude.exact for t in terms):
        total = Fraction(0)
        for t in terms:
            total += t.norm_sq()
        return total
    return float(sum(float(t.norm_sq()) for t in terms))


def expand_block_terms(terms: Sequence[BlockTerm], op: WitnessOperator, dims) -> ReplicaState:
    """Expand block terms back into an explicit replica state (for checks)."""
    n, m = op.num_subsystems, op.num_replicas
    acc = {}
    for t in terms:
        partial = [([0] * (n * m), t.amplitude)]
        for (s, r), v in t.untouched:
            for lab, _ in partial:
                lab[r * n + s] = v
        for b in t.blocks:
            k = len(b.content)
            coef = Fraction(1, math.factorial(k))
            nxt = []
            for lab, amp in partial:
                for perm in itertools.permutations(range(k)):
                    new = list(lab)
                    for i, j in enumerate(perm):
                        new[b.replicas[i] * n + b.subsystem] = b.content[j]
                    sgn = signature(perm) if b.kind == "antisym" else 1
                    nxt.append((new, amp * ExactScalar(coef * sgn)))
            partial = nxt
        for lab, amp in partial:
            key = tuple(lab)
            acc[key] = acc[key] + amp if key in acc else amp
    return ReplicaState(tuple(dims), {k: v for k, v in acc.items() if not v.is_zero()}, m)


# -- lazy enumeration ---------------------------------------------------------

def _layer_plan(op: WitnessOperator):
    """Per replica: the factors it feeds and the subsystems it leaves untouched."""
    touches = []
    free = []
    for r in range(op.num_replicas):
        t = [(j, f.subsystem, f.kind == "antisym") for j, f in enumerate(op.factors) if r in f.replicas]
        covered = {s for _, s, _ in t}
        touches.append(t)
        free.append([s for s in range(op.num_subsystems) if s not in covered])
    return touches, free


def _run_layers(plan, kets, layer, start: int, m: int, cap: int, stats: TermStats):
    touches, free = plan
    for r in range(start, m):
        acc = {}
        get = acc.get
        tr = touches[r]
        fr = free[r]
        last = r == m - 1
        for (contents, untouched), val in layer.items():
            for ket, a in kets:
                stats.enumerated += 1
                new = list(contents)
                flip = False
                dead = False
                for j, s, anti in tr:
                    v = ket[s]
                    c = new[j]
                    pos = bisect.bisect_left(c, v)
                    if anti:
                        if pos < len(c) and c[pos] == v:
                            dead = True
                            break
                        if (len(c) - pos) & 1:
                            flip = not flip
                    new[j] = c[:pos] + (v,) + c[pos:]
                if dead:
                    stats.pruned += 1
                    continue
                if last:
                    stats.surviving += 1
                key = (tuple(new), untouched + tuple(ket[s] for s in fr) if fr else untouched)
                w = val * a
                if flip:
                    w = -w
                prev = get(key)
                acc[key] = w if prev is None else prev + w
        layer = {k: v for k, v in acc.items() if v}
        stats.max_live = max(stats.max_live, len(layer))
        if len(layer) > cap:
            raise ResourceCapExceeded(len(layer), cap)
    return layer


def _worker(args):
    plan, kets, layer, m, cap = args
    stats = TermStats()
    out = _run_layers(plan, kets, layer, 1, m, cap, stats)
    return out, stats


def evaluate_fast(
    op: WitnessOperator,
    psi: ReplicaState,
    m: int | None = None,
    *,
    prune: bool = True,
    cap: int = DEFAULT_CAP,
    workers: int = 1,
) -> FastEvaluation:
    """Squared residual norm of ``op psi^{(x) m}`` without permutation sums.

    With ``prune=False`` the full tensor power is materialized and passed
    to :func:`canonicalize`; this is the slow path used to check that
    pruning is sound.  ``workers > 1`` splits the enumeration by the term
    chosen for the first replica across processes; the merged result does
    not depend on the split.
    """
    _require_factored(op)
    if m is None:
        m = op.num_replicas
    if m != op.num_replicas:
        raise ShapeMismatchError(f"witness needs {op.num_replicas} replicas, got {m}")
    if psi.num_replicas != 1 or psi.num_subsystems != op.num_subsystems:
        raise ShapeMismatchError("expected a single-copy state with the witness's subsystem count")
    stats = TermStats()
    free_positions = _untouched_positions(op)

    if not prune:
        full = tensor_power(psi, m)
        stats.enumerated = len(full)
        terms = canonicalize(full, op)
        stats.surviving = len(full)
        n = op.num_subsystems
        for label in full.terms:
            for f in op.factors:
                seg = [label[r * n + f.subsystem] for r in f.replicas]
                if f.kind == "antisym" and len(set(seg)) != len(seg):
                    stats.surviving -= 1
                    stats.pruned += 1
                    break
        return _result(terms, stats, psi.exact)

    items = psi.items()
    split = common_scale(a for _, a in items)
    if split is not None:
        scale, weights = split
        kets = list(zip((k for k, _ in items), weights))
        unit = 1
    else:
        scale = ONE
        kets = items
        unit = ONE
    plan = _layer_plan(op)
    start = {(tuple(() for _ in op.factors), ()): unit}
    if workers > 1 and m > 1:
        first = _run_layers(plan, kets, start, 0, 1, cap, stats)
        jobs = [(plan, kets, {k: v}, m, cap) for k, v in sorted(first.items())]
        layer = {}
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part, st in pool.map(_worker, jobs):
                stats.merge(st)
                for k, v in part.items():
                    layer[k] = layer[k] + v if k in layer else v
        layer = {k: v for k, v in layer.items() if v}
    else:
        layer = _run_layers(plan, kets, start, 0, m, cap, stats)
    total = scale ** m
    merged = {k: total * v for k, v in layer.items()} if split is not None else layer
    return _result(_finish(op, merged, free_positions), stats, psi.exact)


def _result(terms, stats: TermStats, exact_input: bool) -> FastEvaluation:
    stats.blocks = len(terms)
    n2 = block_norm_sq(terms)
    exact = exact_input and all(t.amplitude.exact for t in terms)
    return FastEvaluation(n2, zero_status(n2, exact), exact, stats, terms)
