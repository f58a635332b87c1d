"""Factored witness operators used to separate entanglement classes.

Subsystem and replica numbers in this module's arguments are 1-based.
"""

from __future__ import annotations

from typing import Sequence

from .permutation_algebra import LocalSymOp, WitnessOperator

__all__ = [
    "p_minus",
    "antisymmetrizer",
    "symmetrizer",
    "witness_from_factors",
    "a_tau",
    "a_3tau",
    "aas",
    "p_n",
    "schmidt_rank_witness",
]


def p_minus(subsystem: int, replica_pair: Sequence[int]) -> LocalSymOp:
    """Singlet projector ``(1 - swap)/2`` on two replicas of one subsystem."""
    r1, r2 = replica_pair
    if r1 == r2:
        raise ValueError("p_minus needs two distinct replicas")
    return LocalSymOp(subsystem - 1, (r1 - 1, r2 - 1), "antisym")


def antisymmetrizer(subsystem: int, replicas: Sequence[int]) -> LocalSymOp:
    if len(replicas) < 2:
        raise ValueError("an antisymmetrizer needs at least two replicas")
    return LocalSymOp(subsystem - 1, tuple(r - 1 for r in replicas), "antisym")


def symmetrizer(subsystem: int, replicas: Sequence[int]) -> LocalSymOp:
    if len(replicas) < 2:
        raise ValueError("a symmetrizer needs at least two replicas")
    return LocalSymOp(subsystem - 1, tuple(r - 1 for r in replicas), "sym")


def witness_from_factors(factors, num_subsystems: int, num_replicas: int | None = None, name="custom"):
    """Wrap factors into a witness; ``num_replicas`` defaults to the largest replica used."""
    factors = list(factors)
    if num_replicas is None:
        num_replicas = max(f.replicas[-1] for f in factors) + 1
    return WitnessOperator.from_factors(factors, num_subsystems, num_replicas, name=name)


def a_tau(total_parties: int = 3) -> WitnessOperator:
    """Four-replica singlet pattern on qubits 1-3, identity on the rest."""
    if total_parties < 3:
        raise ValueError("a_tau needs at least three parties")
    factors = [
        p_minus(1, (1, 2)), p_minus(1, (3, 4)),
        p_minus(2, (1, 2)), p_minus(2, (3, 4)),
        p_minus(3, (1, 3)), p_minus(3, (2, 4)),
    ]
    name = "a_tau" if total_parties == 3 else f"a_tau(n={total_parties})"
    return WitnessOperator.from_factors(factors, total_parties, 4, name=name)


def a_3tau() -> WitnessOperator:
    """Six-replica antisymmetrizer pattern on three qutrits."""
    factors = [
        antisymmetrizer(1, (1, 2, 3)), antisymmetrizer(1, (4, 5, 6)),
        antisymmetrizer(2, (1, 2, 5)), antisymmetrizer(2, (3, 4, 6)),
        antisymmetrizer(3, (1, 3, 4)), antisymmetrizer(3, (2, 5, 6)),
    ]
    return WitnessOperator.from_factors(factors, 3, 6, name="a_3tau")


def aas() -> WitnessOperator:
    factors = [antisymmetrizer(1, (1, 2, 3)), antisymmetrizer(2, (1, 2, 3)), symmetrizer(3, (1, 2, 3))]
    return WitnessOperator.from_factors(factors, 3, 3, name="aas")


def p_n(n: int, theorem_context: bool = False) -> WitnessOperator:
    """Antisymmetrizers on subsystems 1, 2 and symmetrizers on 3..n, all over ``n`` replicas.

    The operator exists for any ``n >= 3``; with ``theorem_context=True``
    even ``n`` is refused, since the cancellation on the fully
    antisymmetric state only holds for odd ``n``.
    """
    if n < 3:
        raise ValueError("p_n needs n >= 3")
    if theorem_context and n % 2 == 0:
        raise ValueError(
            f"n = {n} is even: the antisymmetric state's terms do not pair off with opposite "
            "signs, so no vanishing claim is made for even n"
        )
    reps = tuple(range(1, n + 1))
    factors = [antisymmetrizer(1, reps), antisymmetrizer(2, reps)]
    factors += [symmetrizer(s, reps) for s in range(3, n + 1)]
    return WitnessOperator.from_factors(factors, n, n, name=f"p_{n}")


def schmidt_rank_witness(k: int, num_subsystems: int = 2) -> WitnessOperator:
    """``A_k`` on subsystem 1 over ``k`` replicas, identity elsewhere."""
    if k < 2:
        raise ValueError("schmidt_rank_witness needs k >= 2")
    return WitnessOperator.from_factors(
        [antisymmetrizer(1, range(1, k + 1))], num_subsystems, k, name=f"schmidt_rank({k})"
    )
