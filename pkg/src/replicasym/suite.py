"""The reproduction table: every named (witness, state) pair with its expected value.

Expected values are the exact residual norms confirmed by exhaustive
evaluation.  Where a published closed form disagrees, the row carries an
annotation giving both numbers.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, prod
from typing import Callable, Mapping

from .canonical_engine import evaluate_fast
from .classifier import VerdictKind, check_obstruction, evaluate, format_rational, tangle
from .permutation_algebra import WitnessOperator, commutes_with_local_powers_check
from .replica_state import ReplicaState, rank_profile
from . import state_library as sl
from . import witness_library as wl

__all__ = ["Discrepancy", "PUBLISHED", "published_note", "Row", "SuiteReport", "DEFAULT_LIBRARY", "reproduce_paper_suite"]

REFERENCE_BUDGET = 5_000_000


@dataclass(frozen=True)
class Discrepancy:
    published: str
    derived: str
    detail: str

    def text(self) -> str:
        return f"published {self.published}; exact {self.derived} ({self.detail})"


PUBLISHED: dict[tuple[str, str], Discrepancy] = {
    ("a_tau", "ghz"): Discrepancy(
        "amplitude 1/4 (norm^2 1/16)", "amplitude 1/16 (norm^2 1/256)",
        "the unit-tangle formula needs 1/16; the published amplitude drops the P- normalization",
    ),
    ("a_3tau", "chi3"): Discrepancy(
        "amplitude 1/(2*6^3) (norm^2 1/186624)", "amplitude 1/(3*6^3) (norm^2 1/419904)",
        "72 surviving signed terms, all constructive, each projected with weight 1/6^6",
    ),
    ("aas", "chi3plus"): Discrepancy(
        "amplitude 1/36 (norm^2 1/1296)", "amplitude 1/18 (norm^2 1/324)",
        "12 surviving terms; both cross-replica derangements are even, so nothing cancels",
    ),
}

_BISEP_NOTE = Discrepancy(
    "amplitude (l1 l2 l3)^(3/2)/(6 sqrt 6)", "norm^2 l1*l2*l3 (amplitude sqrt(l1 l2 l3))",
    "the 6 surviving terms each carry sqrt(l1 l2 l3); the projections contribute 1/6 each and cancel the count",
)
_PN_NOTE = Discrepancy(
    "amplitude 1/(sqrt(N) sqrt(N!)^(N-2))", "norm^2 N^-N (N!)^-(N-2)",
    "the published form gives 1/18 at N=3, against the exact 1/162",
)


def published_note(witness_name: str, state_name: str | None) -> str | None:
    """Annotation for a pair whose published constant disagrees, else ``None``."""
    if not state_name:
        return None
    d = PUBLISHED.get((witness_name, state_name))
    if d is None and witness_name in ("aas", "p_3") and state_name.startswith("biseparable:"):
        d = _BISEP_NOTE
    if d is None and witness_name.startswith("p_") and state_name == f"ghz{witness_name[2:]}":
        d = _PN_NOTE
    if d is None and witness_name == "p_3" and state_name == "chi3plus":
        d = PUBLISHED[("aas", "chi3plus")]
    return f"{witness_name} on {state_name}: {d.text()}" if d else None


@dataclass
class Row:
    id: str
    criterion: int
    description: str
    value: str
    expected: str
    passed: bool
    runtime: float = 0.0
    cross_check: str = ""
    annotation: str = ""

    def to_json(self, timings: bool = False) -> dict:
        out = {
            "id": self.id,
            "criterion": self.criterion,
            "description": self.description,
            "value": self.value,
            "expected": self.expected,
            "status": "PASS" if self.passed else "FAIL",
            "cross_check": self.cross_check,
            "annotation": self.annotation,
        }
        if timings:
            out["runtime_s"] = round(self.runtime, 4)
        return out


@dataclass
class SuiteReport:
    rows: list[Row] = field(default_factory=list)
    include_n5: bool = False

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def failures(self) -> list[Row]:
        return [r for r in self.rows if not r.passed]

    def to_json(self, timings: bool = False) -> dict:
        return {
            "include_n5": self.include_n5,
            "passed": self.passed,
            "counts": {"pass": sum(r.passed for r in self.rows), "fail": len(self.failures())},
            "rows": [r.to_json(timings) for r in self.rows],
        }

    def to_text(self, timings: bool = False) -> str:
        head = ["id", "status", "value", "expected", "check"]
        if timings:
            head.append("time")
        table = [head]
        for r in self.rows:
            line = [r.id, "PASS" if r.passed else "FAIL", r.value, r.expected, r.cross_check or "-"]
            if timings:
                line.append(f"{r.runtime:.3f}s")
            table.append(line)
        widths = [max(len(t[i]) for t in table) for i in range(len(head))]
        lines = ["  ".join(c.ljust(w) for c, w in zip(t, widths)).rstrip() for t in table]
        notes = [f"  [{r.id}] {r.annotation}" for r in self.rows if r.annotation]
        if notes:
            lines += ["", "annotations:"] + notes
        lines += ["", f"{sum(r.passed for r in self.rows)} passed, {len(self.failures())} failed"]
        return "\n".join(lines) + "\n"


DEFAULT_LIBRARY: dict[str, Callable[..., ReplicaState]] = {
    "product": lambda: sl.product_state((2, 2), (1, 1)),
    "bell": sl.bell,
    "schmidt": sl.schmidt_state,
    "ghz": sl.ghz,
    "w": sl.w_qubit,
    "ghz3": lambda: sl.ghz(3, 3),
    "w3": sl.w3_threelevel,
    "chi3": lambda: sl.aharonov(3),
    "chi3plus": sl.aharonov_plus3,
    "biseparable": sl.biseparable,
    "ghz5": lambda: sl.ghz(5, 5),
    "chi5": lambda: sl.aharonov(5),
}


def _random_lambdas(rng: random.Random, k: int = 3) -> list[Fraction]:
    w = [rng.randint(1, 12) for _ in range(k)]
    return [Fraction(x, sum(w)) for x in w]


def _reference_feasible(witness: WitnessOperator, psi: ReplicaState) -> bool:
    if not witness.is_factored:
        return len(psi) ** witness.num_replicas <= REFERENCE_BUDGET
    biggest = max(factorial(len(f.replicas)) for f in witness.factors)
    return len(psi) ** witness.num_replicas * biggest ** 2 <= REFERENCE_BUDGET


def _cross_check(witness, psi, value) -> tuple[str, bool]:
    """Second opinion on a canonical-engine value; ``(label, agrees)``."""
    if _reference_feasible(witness, psi):
        ref = evaluate(witness, psi, engine="reference").norm_sq
        return ("reference=" + format_rational(ref), ref == value)
    if len(psi) ** witness.num_replicas <= REFERENCE_BUDGET:
        unpruned = evaluate_fast(witness, psi, prune=False).norm_sq
        return ("unpruned=" + format_rational(unpruned), unpruned == value)
    return ("skipped (too large)", True)


class _Builder:
    def __init__(self, lib: Mapping[str, Callable], cross: bool):
        self.lib = lib
        self.cross = cross
        self.rows: list[Row] = []

    def state(self, name, *args):
        st = self.lib[name](*args)
        if st.name is None:
            st = st.renamed(name)
        return st

    def norm_row(self, rid, crit, desc, witness, psi, expected, annotation=""):
        """``expected`` is a Fraction, or "nonzero"."""
        t0 = time.perf_counter()
        res = evaluate(witness, psi)
        dt = time.perf_counter() - t0
        if expected == "nonzero":
            ok = res.status == "nonzero"
            exp = "nonzero"
        else:
            ok = res.exact and res.norm_sq == expected
            exp = format_rational(expected)
        check = ""
        if self.cross:
            check, agrees = _cross_check(witness, psi, res.norm_sq)
            ok = ok and agrees
        note = annotation or published_note(witness.name, psi.name) or ""
        self.rows.append(Row(rid, crit, desc, format_rational(res.norm_sq), exp, ok, dt, check, note))

    def value_row(self, rid, crit, desc, fn, expected, annotation=""):
        t0 = time.perf_counter()
        value = fn()
        dt = time.perf_counter() - t0
        self.rows.append(Row(rid, crit, desc, str(value), str(expected), value == expected, dt, "", annotation))


def reproduce_paper_suite(
    include_n5: bool = False,
    library: Mapping[str, Callable] | None = None,
    seed: int = 0,
    cross_check: bool = True,
    commutation_trials: int = 20,
) -> SuiteReport:
    """Run every table row and compare with the stored exact values.

    ``library`` overrides entries of :data:`DEFAULT_LIBRARY` (used to
    check that a corrupted state makes rows fail).
    """
    lib = dict(DEFAULT_LIBRARY)
    if library:
        lib.update(library)
    b = _Builder(lib, cross_check)
    rng = random.Random(seed)
    pm = WitnessOperator.from_factors([wl.p_minus(1, (1, 2))], 2, 2, name="pminus")

    # 1. bipartite baseline
    b.norm_row("1.product", 1, "P- x 1 on product^2", pm, b.state("product"), Fraction(0))
    b.norm_row("1.bell", 1, "P- x 1 on Bell^2", pm, b.state("bell"), Fraction(1, 4))

    # 2. Schmidt rank
    a3 = wl.schmidt_rank_witness(3)
    half = [Fraction(1, 2)] * 2
    b.norm_row("2.psi2", 2, "A_3 x 1 on Psi_2^3 (d=3)", a3, b.state("schmidt", half, 3), Fraction(0))
    for i in range(5):
        lam = _random_lambdas(rng)
        b.norm_row(f"2.psi3.{i + 1}", 2, f"A_3 x 1 on Psi_3({','.join(map(str, lam))})^3",
                   a3, b.state("schmidt", lam), prod(lam))
    for k in range(2, 5):
        ak = wl.schmidt_rank_witness(k)
        low = [Fraction(1, k - 1)] * (k - 1)
        full = [Fraction(1, k)] * k
        b.norm_row(f"2.k{k}.below", 2, f"A_{k} x 1 on rank {k - 1}", ak, b.state("schmidt", low, k), Fraction(0))
        b.norm_row(f"2.k{k}.at", 2, f"A_{k} x 1 on rank {k}", ak, b.state("schmidt", full), prod(full))

    # 3. GHZ vs W
    at = wl.a_tau(3)
    b.norm_row("3.w", 3, "A_tau on W^4", at, b.state("w"), Fraction(0))
    b.norm_row("3.ghz", 3, "A_tau on GHZ^4", at, b.state("ghz"), Fraction(1, 256))
    b.value_row("3.tangle.ghz", 3, "tangle(GHZ)", lambda: tangle(b.state("ghz")).value, 1)
    b.value_row("3.tangle.w", 3, "tangle(W)", lambda: tangle(b.state("w")).value, 0)
    for n in (4, 5):
        atn = wl.a_tau(n)
        b.norm_row(f"3.n{n}.w", 3, f"A_tau x 1 on W^{n}", atn, sl.w_qubit(n), Fraction(0))
        b.norm_row(f"3.n{n}.ghz", 3, f"A_tau x 1 on GHZ^{n}", atn, sl.ghz(n, 2), "nonzero")

    # 4. three-level separation
    a3t = wl.a_3tau()
    b.norm_row("4.w3", 4, "A_3tau on W3^6", a3t, b.state("w3"), Fraction(0))
    b.norm_row("4.ghz3", 4, "A_3tau on GHZ3^6", a3t, b.state("ghz3"), Fraction(1, 4 * 3**5) ** 2)
    b.norm_row("4.chi3", 4, "A_3tau on chi3^6", a3t, b.state("chi3"), Fraction(1, 3 * 6**3) ** 2)

    # 5. A x A x S
    w_aas = wl.aas()
    b.norm_row("5.ghz3", 5, "AAS on GHZ3^3", w_aas, b.state("ghz3"), Fraction(1, 162))
    b.norm_row("5.chi3", 5, "AAS on chi3^3", w_aas, b.state("chi3"), Fraction(0))
    b.norm_row("5.chi3plus", 5, "AAS on chi3+^3", w_aas, b.state("chi3plus"), Fraction(1, 324))
    bs = [Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)]
    b.norm_row("5.bs.l3pos", 5, "AAS on Psi_BS, l3 > 0", w_aas, b.state("biseparable", bs), "nonzero")
    b.norm_row("5.bs.l3zero", 5, "AAS on Psi_BS, l3 = 0", w_aas,
               b.state("biseparable", [Fraction(1, 2), Fraction(1, 2), 0]), Fraction(0))
    for i in range(5):
        lam = _random_lambdas(rng)
        b.norm_row(f"5.bs.{i + 1}", 5, f"AAS on Psi_BS({','.join(map(str, lam))})",
                   w_aas, b.state("biseparable", lam), prod(lam))

    # 6. N-partite
    b.value_row("6.p3_is_aas", 6, "P_3 equals AAS as a term set",
                lambda: wl.p_n(3).same_operator(wl.aas()), True)
    p3 = wl.p_n(3)
    b.norm_row("6.p3.ghz3", 6, "P_3 on GHZ3^3", p3, b.state("ghz3"), Fraction(1, 3**3 * 6))
    b.norm_row("6.p3.chi3", 6, "P_3 on chi3^3", p3, b.state("chi3"), Fraction(0))
    if include_n5:
        p5 = wl.p_n(5, theorem_context=True)
        b.norm_row("6.p5.chi5", 6, "P_5 on chi5^5", p5, b.state("chi5"), Fraction(0))
        b.norm_row("6.p5.ghz5", 6, "P_5 on GHZ5^5", p5, b.state("ghz5"), Fraction(1, 5**5 * 120**3))

    # 7. engine agreement over every row above
    checked = [r for r in b.rows if r.cross_check.startswith(("reference=", "unpruned="))]
    n_agree = sum(r.cross_check.split("=", 1)[1] == r.value for r in checked)
    if cross_check:
        b.rows.append(Row("7.engines", 7, "canonical equals a second engine on every checked row",
                          f"{n_agree}/{len(checked)}", f"{len(checked)}/{len(checked)}", n_agree == len(checked)))

    # 8. commutation with local powers
    shapes = [
        (pm, (2, 2)), (at, (2, 2, 2)), (a3t, (3, 3, 3)), (w_aas, (3, 3, 3)),
        (a3, (3, 3)), (wl.a_tau(4), (2, 2, 2, 2)),
    ]
    if include_n5:
        shapes.append((wl.p_n(5), (5, 5, 2, 2, 2)))
    for op, dims in shapes:
        b.value_row(f"8.{op.name}", 8, f"{op.name} commutes with (F1 x ... x FN)^M",
                    lambda op=op, dims=dims: commutes_with_local_powers_check(
                        op, trials=commutation_trials, seed=seed, dims=dims), True)

    # 9. verdicts and rank profiles
    verdicts = [
        ("9.w_ghz", "w", "ghz", at, {VerdictKind.INEQUIVALENT}),
        ("9.w3_ghz3", "w3", "ghz3", a3t, {VerdictKind.INEQUIVALENT}),
        ("9.chi3_bs", "chi3", None, w_aas, {VerdictKind.OBSTRUCTION}),
        ("9.chi3_ghz3", "chi3", "ghz3", w_aas, {VerdictKind.INEQUIVALENT}),
        ("9.ghz3_w3", "ghz3", "w3", w_aas, {VerdictKind.OBSTRUCTION, VerdictKind.INCONCLUSIVE}),
    ]
    for rid, src, dst, op, allowed in verdicts:
        psi = b.state(src)
        phi = b.state(dst) if dst else b.state("biseparable", [Fraction(1, 3)] * 3)
        t0 = time.perf_counter()
        v = check_obstruction(psi, phi, op)
        dt = time.perf_counter() - t0
        exp = " or ".join(sorted(k.value for k in allowed))
        b.rows.append(Row(rid, 9, f"{op.name}: {psi.name} -> {phi.name}", v.kind.value, exp, v.kind in allowed, dt))
    ranks = [
        ("ghz", (2, 2, 2)), ("w", (2, 2, 2)), ("ghz3", (3, 3, 3)), ("w3", (3, 3, 3)),
        ("chi3", (3, 3, 3)), ("chi3plus", (3, 3, 3)),
    ]
    for name, expected in ranks:
        b.value_row(f"9.ranks.{name}", 9, f"rank profile of {name}", lambda n=name: rank_profile(b.state(n)), expected)
    b.value_row("9.ranks.biseparable", 9, "rank profile of Psi_BS(1/2,1/3,1/6)",
                lambda: rank_profile(b.state("biseparable", bs)), (3, 3, 1))

    return SuiteReport(b.rows, include_n5)
