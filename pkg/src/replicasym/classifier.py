"""Obstruction verdicts from witness residuals.

If a witness ``A`` kills ``psi^{(x) M}`` but not ``phi^{(x) M}``, then
``phi`` cannot be reached from ``psi`` by local operations, because ``A``
commutes with every ``(F_1 (x) ... (x) F_N)^{(x) M}``.  If in addition
the single-subsystem reduced density ranks of both states coincide, the
local maps could be taken invertible, so the two states are inequivalent.
Nothing here ever certifies equivalence.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .canonical_engine import DEFAULT_CAP, TermStats, evaluate_fast
from .errors import ResourceCapExceeded, ShapeMismatchError
from .exact_scalar import AMBIGUOUS_THRESHOLD, ExactScalar, zero_status
from .permutation_algebra import WitnessOperator, apply_witness_reference
from .replica_state import ReplicaState, norm_sq, rank_profile, tensor_power
from .witness_library import a_tau

__all__ = [
    "Evaluation",
    "VerdictKind",
    "Verdict",
    "JointVerdict",
    "Tangle",
    "evaluate",
    "check_obstruction",
    "check_pair",
    "tangle",
    "format_rational",
]


def format_rational(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


@dataclass
class Evaluation:
    witness: str
    m: int
    norm_sq: object
    status: str
    exact: bool
    engine: str
    stats: TermStats | None = None

    @property
    def is_zero(self) -> bool:
        return self.status == "zero"

    def residual_json(self) -> dict:
        return {"exact": format_rational(self.norm_sq) if self.exact else None, "float": float(self.norm_sq), "status": self.status}

    def to_json(self) -> dict:
        out = {
            "witness": self.witness,
            "m": self.m,
            "engine": self.engine,
            "residual": self.residual_json(),
            "zero": self.is_zero,
            "exact": self.exact,
        }
        if self.stats is not None:
            out["stats"] = self.stats.to_json()
        return out


def evaluate(
    witness: WitnessOperator,
    psi: ReplicaState,
    m: int | None = None,
    *,
    engine: str = "auto",
    cap: int = DEFAULT_CAP,
    workers: int = 1,
) -> Evaluation:
    """Squared norm of ``witness psi^{(x) m}`` and its zero status.

    ``engine="auto"`` picks the canonical engine for factored witnesses
    and the reference engine otherwise.
    """
    if m is None:
        m = witness.num_replicas
    if m != witness.num_replicas:
        raise ShapeMismatchError(f"witness {witness.name} needs {witness.num_replicas} replicas, got {m}")
    if psi.num_subsystems != witness.num_subsystems:
        raise ShapeMismatchError(
            f"witness {witness.name} acts on {witness.num_subsystems} subsystems, state has {psi.num_subsystems}"
        )
    if engine == "auto":
        engine = "canonical" if witness.is_factored else "reference"
    if engine == "canonical":
        res = evaluate_fast(witness, psi, m, cap=cap, workers=workers)
        return Evaluation(witness.name, m, res.norm_sq, res.status, res.exact, "canonical", res.stats)
    if engine != "reference":
        raise ValueError(f"unknown engine {engine!r}")
    size = len(psi) ** m
    if size > cap:
        raise ResourceCapExceeded(size, cap)
    power = tensor_power(psi, m)
    out = apply_witness_reference(witness, power)
    n2 = norm_sq(out)
    exact = psi.exact and out.exact
    stats = TermStats(enumerated=len(power), surviving=len(out), blocks=len(out))
    return Evaluation(witness.name, m, n2, zero_status(n2, exact), exact, "reference", stats)


class VerdictKind(str, enum.Enum):
    OBSTRUCTION = "OBSTRUCTION"
    INEQUIVALENT = "INEQUIVALENT"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass
class Verdict:
    """Outcome of one witness applied to ``psi`` (source) and ``phi`` (target).

    ``OBSTRUCTION`` means ``phi`` cannot be obtained from ``psi``;
    ``INEQUIVALENT`` means neither can be obtained from the other.
    """

    kind: VerdictKind
    witness: str
    m: int
    psi: Evaluation
    phi: Evaluation
    ranks_psi: tuple[int, ...]
    ranks_phi: tuple[int, ...]
    psi_name: str | None = None
    phi_name: str | None = None
    annotations: list[str] = field(default_factory=list)

    @property
    def exact(self) -> bool:
        return self.psi.exact and self.phi.exact

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "witness": self.witness,
            "m": self.m,
            "from": self.psi_name,
            "to": self.phi_name,
            "residuals": {"psi": self.psi.residual_json(), "phi": self.phi.residual_json()},
            "ranks": {"psi": list(self.ranks_psi), "phi": list(self.ranks_phi)},
            "exact": self.exact,
            "annotations": list(self.annotations),
        }


def _annotations(witness: WitnessOperator, *states: ReplicaState) -> list[str]:
    from .suite import published_note

    notes = list(witness.notes)
    for st in states:
        note = published_note(witness.name, st.name)
        if note:
            notes.append(note)
        if (
            witness.name.startswith("p_")
            and witness.num_subsystems % 2 == 0
            and (st.name or "").startswith(("aharonov", "chi"))
            and not (st.name or "").endswith(("plus", "+"))
        ):
            notes.append(
                f"{witness.name}: even N, so no vanishing claim is made for the antisymmetric state"
            )
    return notes


def check_obstruction(
    psi: ReplicaState,
    phi: ReplicaState,
    witness: WitnessOperator,
    m: int | None = None,
    **eval_kw,
) -> Verdict:
    """Run ``witness`` on both states and apply the rank-sufficiency rule."""
    if psi.dims != phi.dims:
        raise ShapeMismatchError(f"states have different shapes: {psi.dims} vs {phi.dims}")
    ep = evaluate(witness, psi, m, **eval_kw)
    ef = evaluate(witness, phi, m, **eval_kw)
    rp = rank_profile(psi)
    rf = rank_profile(phi)
    notes = _annotations(witness, psi, phi)
    if ep.status == "ambiguous" or ef.status == "ambiguous":
        kind = VerdictKind.INCONCLUSIVE
        notes.append("float residual inside the guard band; no verdict drawn")
    elif ep.is_zero and ef.status == "nonzero":
        kind = VerdictKind.INEQUIVALENT if rp == rf else VerdictKind.OBSTRUCTION
    else:
        kind = VerdictKind.INCONCLUSIVE
        if ep.is_zero and ef.is_zero:
            notes.append("witness vanishes on both states")
        elif not ep.is_zero and not ef.is_zero:
            notes.append("witness survives on both states")
        else:
            notes.append("witness kills the target but not the source; swap the roles for an obstruction")
    return Verdict(kind, witness.name, ep.m, ep, ef, rp, rf, psi.name, phi.name, notes)


@dataclass
class JointVerdict:
    """Several witnesses run as independent checks in both directions."""

    kind: VerdictKind
    forward: list[Verdict]
    backward: list[Verdict]

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "forward": [v.to_json() for v in self.forward],
            "backward": [v.to_json() for v in self.backward],
        }


def check_pair(psi: ReplicaState, phi: ReplicaState, witnesses: Sequence[WitnessOperator], **eval_kw) -> JointVerdict:
    """Combine one-way obstructions from (possibly different-``M``) witnesses.

    ``INEQUIVALENT`` when some witness gives it outright or when there are
    obstructions in both directions; ``OBSTRUCTION`` when there is one in
    the forward (``psi -> phi``) direction only.
    """
    fwd = [check_obstruction(psi, phi, w, **eval_kw) for w in witnesses]
    bwd = [check_obstruction(phi, psi, w, **eval_kw) for w in witnesses]
    kinds_f = {v.kind for v in fwd}
    kinds_b = {v.kind for v in bwd}
    blocked_f = kinds_f & {VerdictKind.OBSTRUCTION, VerdictKind.INEQUIVALENT}
    blocked_b = kinds_b & {VerdictKind.OBSTRUCTION, VerdictKind.INEQUIVALENT}
    if VerdictKind.INEQUIVALENT in kinds_f | kinds_b or (blocked_f and blocked_b):
        kind = VerdictKind.INEQUIVALENT
    elif blocked_f:
        kind = VerdictKind.OBSTRUCTION
    else:
        kind = VerdictKind.INCONCLUSIVE
    return JointVerdict(kind, fwd, bwd)


@dataclass
class Tangle:
    value: object
    exact: bool
    interval: tuple[float, float]

    def __float__(self):
        return float(self.value)


def tangle(psi: ReplicaState) -> Tangle:
    """Three-qubit tangle as ``16 sqrt(||A_tau psi^{(x) 4}||^2)``.

    The expectation value equals the squared residual because ``A_tau`` is
    a projector.  Exact inputs give an exact radical; float inputs give a
    value with an interval from the zero guard band.
    """
    if psi.dims != (2, 2, 2) or psi.num_replicas != 1:
        raise ShapeMismatchError("tangle needs a single-copy three-qubit state")
    res = evaluate(a_tau(3), psi)
    if res.exact:
        value = ExactScalar.sqrt(res.norm_sq) * 16
        f = float(value)
        return Tangle(value, True, (f, f))
    n2 = float(res.norm_sq)
    lo = 16 * math.sqrt(max(0.0, n2 - AMBIGUOUS_THRESHOLD))
    hi = 16 * math.sqrt(n2 + AMBIGUOUS_THRESHOLD)
    return Tangle(16 * math.sqrt(max(n2, 0.0)), False, (lo, hi))
