import random
from fractions import Fraction

import pytest

import oracles
from replicasym import state_library as sl
from replicasym import witness_library as wl
from replicasym.canonical_engine import (
    SymBlock,
    block_norm_sq,
    canonicalize,
    evaluate_fast,
    expand_block_terms,
)
from replicasym.errors import NotFactoredError, ResourceCapExceeded, ShapeMismatchError
from replicasym.permutation_algebra import (
    LocalSymOp,
    WitnessOperator,
    apply_witness_reference,
    random_sparse_state,
)
from replicasym.replica_state import ReplicaState, norm_sq


def random_witness(rng, n, m):
    factors = []
    for s in range(n):
        free = list(range(m))
        rng.shuffle(free)
        while len(free) >= 2 and rng.random() < 0.75:
            k = rng.randint(2, len(free))
            reps, free = free[:k], free[k:]
            factors.append(LocalSymOp(s, tuple(reps), rng.choice(("antisym", "sym"))))
    if not factors:
        factors.append(LocalSymOp(rng.randrange(n), (0, 1), "antisym"))
    return WitnessOperator.from_factors(factors, n, m)


def test_symblock():
    assert SymBlock.from_segment(0, (0, 1, 2), "antisym", (2, 1, 2)) is None
    b = SymBlock.from_segment(0, (0, 1, 2), "antisym", (3, 1, 2))
    assert b.content == (1, 2, 3) and b.sign == 1
    assert SymBlock.from_segment(0, (0, 1), "antisym", (2, 1)).sign == -1
    assert b.norm_sq() == Fraction(1, 6)
    s = SymBlock.from_segment(0, (0, 1, 2), "sym", (2, 1, 2))
    assert s.content == (1, 2, 2) and s.norm_sq() == Fraction(2, 6)


def test_canonicalize_idempotent_and_expands_to_reference():
    rng = random.Random(21)
    for _ in range(40):
        n, m = rng.randint(1, 3), rng.randint(2, 4)
        dims = tuple(rng.randint(2, 3) for _ in range(n))
        op = random_witness(rng, n, m)
        x = random_sparse_state(rng, dims, m, 5, complex_amps=rng.random() < 0.4)
        terms = canonicalize(x, op)
        assert canonicalize(terms, op) == terms
        explicit = expand_block_terms(terms, op, dims)
        assert explicit == apply_witness_reference(op, x)
        assert block_norm_sq(terms) == norm_sq(explicit)


def test_pruning_is_sound():
    rng = random.Random(8)
    for _ in range(25):
        n, m = rng.randint(1, 3), rng.randint(2, 4)
        dims = tuple(rng.randint(2, 3) for _ in range(n))
        op = random_witness(rng, n, m)
        psi = random_sparse_state(rng, dims, 1, rng.randint(1, 4))
        if not psi:
            continue
        fast = evaluate_fast(op, psi)
        slow = evaluate_fast(op, psi, prune=False)
        assert fast.norm_sq == slow.norm_sq
        assert fast.norm_sq <= norm_sq(psi) ** m


@pytest.mark.parametrize(
    "witness, factors, state, kets",
    [
        (wl.a_3tau(), oracles.A_3TAU, sl.aharonov(3), oracles.chi_kets(3)),
        (wl.a_3tau(), oracles.A_3TAU, sl.ghz(3, 3), oracles.ghz_kets(3, 3)),
        (wl.a_3tau(), oracles.A_3TAU, sl.w3_threelevel(), oracles.w3_kets()),
        (wl.aas(), oracles.AAS, sl.aharonov_plus3(), oracles.chi_kets(3, plus=True)),
        (wl.aas(), oracles.AAS, sl.biseparable(["1/2", "1/3", "1/6"]), oracles.biseparable_kets(
            [Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)])),
        (wl.p_n(5), oracles.p_n_factors(5), sl.ghz(5, 5), oracles.ghz_kets(5, 5)),
    ],
)
def test_matches_enumeration_oracle(witness, factors, state, kets):
    assert evaluate_fast(witness, state).norm_sq == oracles.enumeration_norm_sq(factors, kets, witness.num_replicas)


def test_workers_do_not_change_result():
    w = wl.a_3tau()
    psi = sl.aharonov(3)
    one = evaluate_fast(w, psi)
    two = evaluate_fast(w, psi, workers=2)
    assert one.norm_sq == two.norm_sq
    # partial-term merging happens per worker, so only the final blocks agree
    assert one.stats.blocks == two.stats.blocks


def test_resource_cap():
    with pytest.raises(ResourceCapExceeded) as exc:
        evaluate_fast(wl.a_3tau(), sl.aharonov(3), cap=10)
    assert exc.value.cap == 10


def test_rejects_general_form_and_bad_shapes():
    with pytest.raises(NotFactoredError):
        evaluate_fast(wl.aas().expand(), sl.ghz(3, 3))
    with pytest.raises(ShapeMismatchError):
        evaluate_fast(wl.aas(), sl.bell())
    with pytest.raises(ShapeMismatchError):
        evaluate_fast(wl.aas(), sl.ghz(3, 3), m=4)


def test_float_states():
    psi = ReplicaState((2, 2, 2), {(1, 1, 1): 2**-0.5, (2, 2, 2): 2**-0.5})
    res = evaluate_fast(wl.a_tau(3), psi)
    assert not res.exact
    assert abs(res.norm_sq - 1 / 256) < 1e-15
    assert res.status == "nonzero"
    w = ReplicaState((2, 2, 2), {(2, 1, 1): 3**-0.5, (1, 2, 1): 3**-0.5, (1, 1, 2): 3**-0.5})
    assert evaluate_fast(wl.a_tau(3), w).status == "zero"


def test_stats_fields():
    res = evaluate_fast(wl.aas(), sl.ghz(3, 3))
    st = res.stats.to_json()
    assert set(st) == {"enumerated", "pruned", "surviving", "blocks"}
    assert st["blocks"] == len(res.terms) == 1
