import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from replicasym import witness_library as wl
from replicasym.errors import ShapeMismatchError
from replicasym.permutation_algebra import (
    LocalSymOp,
    ReplicaPermutation,
    WitnessOperator,
    apply_permutation,
    apply_witness_reference,
    commutes_with_local_powers_check,
    compose,
    random_sparse_state,
    signature,
)
from replicasym.replica_state import ReplicaState, add_scaled, inner_product, norm_sq, tensor_power

perms4 = st.permutations(range(4)).map(ReplicaPermutation)


def test_permutation_basics():
    p = ReplicaPermutation.from_one_based([2, 3, 1])
    assert p.images == (1, 2, 0)
    assert p.one_based() == [2, 3, 1]
    assert (p * p.inverse()).is_identity()
    assert p.signature() == 1
    assert ReplicaPermutation.transposition(3, 1, 3).images == (2, 1, 0)
    assert ReplicaPermutation.embed(5, (1, 3), (1, 0)).images == (0, 3, 2, 1, 4)
    with pytest.raises(ValueError):
        ReplicaPermutation((0, 0, 1))


def test_signature_matches_determinant():
    for p in itertools.permutations(range(5)):
        mat = np.zeros((5, 5))
        for i, j in enumerate(p):
            mat[j, i] = 1
        assert signature(p) == round(np.linalg.det(mat))


def test_action_moves_replica_contents():
    st_ = ReplicaState((2, 3), {(1, 2, 2, 3, 1, 1): 1}, replicas=3)
    out = apply_permutation(st_, 2, ReplicaPermutation((1, 2, 0)))
    # subsystem-2 entries (2, 3, 1) move from replica i to replica i+1
    assert list(out.terms) == [(1, 1, 2, 2, 1, 3)]


@given(perms4, perms4)
@settings(max_examples=40, deadline=None)
def test_group_action(sigma, pi):
    rng = random.Random(hash((sigma.images, pi.images)) & 0xFFFF)
    x = random_sparse_state(rng, (2, 3), 4, 3)
    for s in (1, 2):
        lhs = apply_permutation(apply_permutation(x, s, pi), s, sigma)
        rhs = apply_permutation(x, s, sigma * pi)
        assert lhs == rhs


def test_local_sym_op_validation_and_json():
    op = wl.p_minus(2, (3, 1))
    assert op.replicas == (0, 2) and op.subsystem == 1
    assert op.to_json() == {"subsystem": 2, "replicas": [1, 3], "kind": "pminus"}
    with pytest.raises(ValueError):
        LocalSymOp(0, (1, 1), "antisym")
    with pytest.raises(ValueError):
        LocalSymOp(0, (0, 1), "bogus")
    coeffs = [c for c, _ in wl.antisymmetrizer(1, (1, 2, 3)).expansion(3)]
    assert sorted(coeffs, key=float) == [Fraction(-1, 6)] * 3 + [Fraction(1, 6)] * 3


def test_overlapping_supports_refused():
    with pytest.raises(ValueError, match="overlap"):
        WitnessOperator.from_factors([wl.p_minus(1, (1, 2)), wl.p_minus(1, (2, 3))], 1, 3)
    with pytest.raises(ShapeMismatchError):
        WitnessOperator.from_factors([wl.p_minus(3, (1, 2))], 2, 2)


def _random_factored(rng, n, m):
    factors = []
    for s in range(n):
        free = list(range(m))
        rng.shuffle(free)
        while len(free) >= 2 and rng.random() < 0.7:
            k = rng.randint(2, len(free))
            reps, free = free[:k], free[k:]
            factors.append(LocalSymOp(s, tuple(reps), rng.choice(("antisym", "sym"))))
    if not factors:
        factors.append(LocalSymOp(0, (0, 1), "antisym"))
    return WitnessOperator.from_factors(factors, n, m)


def test_projector_properties_on_random_states():
    rng = random.Random(5)
    for _ in range(30):
        n, m = rng.randint(1, 3), rng.randint(2, 4)
        dims = tuple(rng.randint(2, 3) for _ in range(n))
        op = _random_factored(rng, n, m)
        x = random_sparse_state(rng, dims, m, 4, complex_amps=True)
        y = random_sparse_state(rng, dims, m, 4)
        ax = apply_witness_reference(op, x)
        # idempotent
        assert apply_witness_reference(op, ax) == ax
        # self-adjoint
        assert inner_product(y, ax) == inner_product(apply_witness_reference(op, y), x)
        # norm never grows
        assert norm_sq(ax) <= norm_sq(x)


def test_expand_and_term_sets():
    w = wl.aas()
    e = w.expand()
    assert not e.is_factored
    assert len(e.terms) == 6 * 6 * 6
    assert w.same_operator(e)
    assert wl.p_n(3).same_operator(w)
    assert not wl.a_tau(3).same_operator(WitnessOperator.identity(3, 4))


def test_general_form_matches_factored():
    rng = random.Random(9)
    w = wl.aas()
    g = w.expand()
    for _ in range(5):
        x = random_sparse_state(rng, (3, 3, 3), 3, 5)
        assert apply_witness_reference(w, x) == apply_witness_reference(g, x)


def test_compose_idempotent_and_order():
    w = wl.a_tau(3)
    assert compose(w, w).same_operator(w)
    m = 3
    a = WitnessOperator(1, m, terms=[(1, (ReplicaPermutation((1, 0, 2)),))])
    b = WitnessOperator(1, m, terms=[(1, (ReplicaPermutation((0, 2, 1)),))])
    ab = compose(a, b)
    rng = random.Random(2)
    x = random_sparse_state(rng, (3,), m, 4)
    assert apply_witness_reference(ab, x) == apply_witness_reference(a, apply_witness_reference(b, x))


def test_identity_operator():
    x = random_sparse_state(random.Random(1), (2, 2), 3, 5)
    assert apply_witness_reference(WitnessOperator.identity(2, 3), x) == x


@pytest.mark.parametrize(
    "factors, witness, kets, dims",
    [
        (oracles.A_TAU, wl.a_tau(3), oracles.as_complex(oracles.ghz_kets(3, 2)), (2, 2, 2)),
        (oracles.A_TAU, wl.a_tau(3), oracles.as_complex(oracles.w_kets(3)), (2, 2, 2)),
        (oracles.AAS, wl.aas(), oracles.as_complex(oracles.chi_kets(3, plus=True)), (3, 3, 3)),
        (oracles.AAS, wl.aas(), oracles.as_complex(oracles.w3_kets()), (3, 3, 3)),
    ],
)
def test_reference_matches_dense_oracle(factors, witness, kets, dims):
    psi = ReplicaState(dims, {k: v for k, v in kets.items()})
    m = witness.num_replicas
    ref = apply_witness_reference(witness, tensor_power(psi, m))
    t = oracles.apply_dense(factors, oracles.dense_vector(kets, dims, m), len(dims), m)
    dense = {}
    for idx in zip(*np.nonzero(np.abs(t) > 1e-12)):
        dense[tuple(int(i) + 1 for i in idx)] = t[idx]
    assert set(dense) == set(ref.terms)
    for k, v in dense.items():
        assert abs(complex(ref.terms[k]) - v) < 1e-12


def test_commutation_holds_for_library():
    for op, dims in [(wl.a_tau(3), (2, 2, 2)), (wl.aas(), (3, 3, 3)), (wl.schmidt_rank_witness(3), (3, 3))]:
        assert commutes_with_local_powers_check(op, trials=6, seed=4, dims=dims)


def test_commutation_detects_non_symmetric_operator():
    # an operator that acts on one replica only is not replica symmetric
    def act(x):
        m = x.num_replicas
        out = ReplicaState.empty(x.dims, m)
        for k, a in x.items():
            if k[0] == 1:
                out = add_scaled(out, a, ReplicaState(x.dims, {k: 1}, m))
        return out

    assert not commutes_with_local_powers_check(act, trials=10, seed=0, dims=(2, 2), num_subsystems=2, num_replicas=2)


def test_commutation_check_needs_shape():
    with pytest.raises(ValueError):
        commutes_with_local_powers_check(lambda x: x)
