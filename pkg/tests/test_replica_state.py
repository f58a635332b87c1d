import random
from fractions import Fraction

import numpy as np
import pytest

from replicasym import state_library as sl
from replicasym.errors import ShapeMismatchError
from replicasym.exact_scalar import ExactScalar
from replicasym.permutation_algebra import random_sparse_state
from replicasym.replica_state import (
    ReplicaState,
    SystemShape,
    add_scaled,
    apply_local_operators,
    inner_product,
    norm_sq,
    rank_profile,
    reduced_density_rank,
    tensor_power,
    tensor_product,
)


def dense(state):
    v = np.zeros(state.dims, dtype=complex)
    for k, a in state.items():
        v[tuple(x - 1 for x in k)] = complex(a)
    return v


def svd_rank(state, s):
    t = np.moveaxis(dense(state), s - 1, 0)
    return int(np.linalg.matrix_rank(t.reshape(t.shape[0], -1), tol=1e-10))


def test_label_validation():
    with pytest.raises(ShapeMismatchError):
        ReplicaState((2, 2), {(1, 1, 1): 1})
    with pytest.raises(ValueError):
        ReplicaState((2, 2), {(1, 3): 1})
    with pytest.raises(ValueError):
        ReplicaState((2, 2), [((1, 1), 1), ((1, 1), 2)])
    with pytest.raises(ValueError):
        SystemShape((2, 0))


def test_zero_amplitudes_dropped_and_row_labels():
    st = ReplicaState((2, 2), {((1, 2), (2, 1)): 1, ((1, 1), (1, 1)): 0}, replicas=2)
    assert len(st) == 1
    assert st.rows((1, 2, 2, 1)) == ((1, 2), (2, 1))


def test_tensor_power_layout_and_norm():
    psi = sl.ghz()
    p2 = tensor_power(psi, 2)
    assert p2.num_replicas == 2 and len(p2) == 4
    assert p2.amplitude((1, 1, 1, 2, 2, 2)) == Fraction(1, 2)
    assert norm_sq(tensor_power(sl.w3_threelevel(), 3)) == 1


def test_tensor_power_float_path():
    psi = ReplicaState((2,), {(1,): 0.6, (2,): 0.8})
    p = tensor_power(psi, 3)
    assert not p.exact
    assert abs(norm_sq(p) - 1) < 1e-12


def test_inner_product_and_add_scaled():
    a = sl.ghz()
    b = sl.w_qubit()
    assert inner_product(a, b) == 0
    assert inner_product(a, a) == 1
    c = add_scaled(a, -1, a)
    assert len(c) == 0
    z = ReplicaState((2,), {(1,): ExactScalar(0, 1)})
    assert inner_product(z, z) == 1
    assert inner_product(z, ReplicaState((2,), {(1,): 1})) == ExactScalar(0, -1)


def test_tensor_product():
    t = tensor_product(sl.bell(), sl.product_state((3,), (2,)))
    assert t.dims == (2, 2, 3) and norm_sq(t) == 1


def test_normalize():
    st = ReplicaState.from_kets((2, 2), {(1, 1): 1, (2, 2): 1}, normalize=True)
    assert st == sl.bell()
    with pytest.raises(ValueError):
        ReplicaState.empty((2,)).normalized()


@pytest.mark.parametrize(
    "state, expected",
    [
        (sl.ghz(), (2, 2, 2)),
        (sl.w_qubit(), (2, 2, 2)),
        (sl.ghz(3, 3), (3, 3, 3)),
        (sl.w3_threelevel(), (3, 3, 3)),
        (sl.aharonov(3), (3, 3, 3)),
        (sl.aharonov_plus3(), (3, 3, 3)),
        (sl.biseparable(["1/2", "1/3", "1/6"]), (3, 3, 1)),
        (sl.schmidt_state(["1/2", "1/2"], dim=3), (2, 2)),
        (sl.product_state((2, 3), (1, 2)), (1, 1)),
    ],
)
def test_rank_profiles(state, expected):
    assert rank_profile(state) == expected
    assert tuple(svd_rank(state, s) for s in range(1, state.num_subsystems + 1)) == expected


def test_rank_with_mixed_radicals():
    # rows carry different square roots; the balanced exact rank must still be 1
    st = ReplicaState((2, 2), {(1, 1): ExactScalar.sqrt(2), (1, 2): ExactScalar.sqrt(3),
                               (2, 1): ExactScalar.sqrt(4), (2, 2): ExactScalar.sqrt(6)})
    assert reduced_density_rank(st, 1) == 1
    assert svd_rank(st, 1) == 1


def test_rank_random_against_svd():
    rng = random.Random(7)
    for _ in range(40):
        dims = tuple(rng.randint(2, 3) for _ in range(3))
        st = random_sparse_state(rng, dims, 1, rng.randint(1, 6), complex_amps=rng.random() < 0.5)
        if not st:
            continue
        for s in (1, 2, 3):
            assert reduced_density_rank(st, s) == svd_rank(st, s)


def test_rank_invariant_under_relabeling_and_local_invertible():
    rng = random.Random(3)
    psi = sl.w3_threelevel()
    perm = {1: 3, 2: 1, 3: 2}
    relabeled = ReplicaState(psi.dims, {(perm[a], b, c): v for (a, b, c), v in psi.items()})
    assert rank_profile(relabeled) == rank_profile(psi)
    for _ in range(5):
        ops = {}
        for s in (1, 2, 3):
            while True:
                f = [[Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(3)] for _ in range(3)]
                if abs(np.linalg.det(np.array(f, dtype=float))) > 1e-9:
                    break
            ops[s] = f
        assert rank_profile(apply_local_operators(psi, ops)) == rank_profile(psi)


def test_rank_errors():
    with pytest.raises(ShapeMismatchError):
        reduced_density_rank(tensor_power(sl.bell(), 2), 1)
    with pytest.raises(ValueError):
        reduced_density_rank(sl.bell(), 3)


def test_apply_local_operators_matches_kron():
    rng = random.Random(11)
    psi = random_sparse_state(rng, (2, 3), 2, 4)
    f1 = [[Fraction(rng.randint(-2, 2)) for _ in range(2)] for _ in range(2)]
    f2 = [[Fraction(rng.randint(-2, 2), 2) for _ in range(3)] for _ in range(3)]
    out = apply_local_operators(psi, {1: f1, 2: f2})
    # axes ordered (r0 s0, r0 s1, r1 s0, r1 s1)
    big = np.kron(np.kron(np.kron(np.array(f1, float), np.array(f2, float)), np.array(f1, float)), np.array(f2, float))
    vin = np.zeros(36)
    for k, a in psi.items():
        vin[np.ravel_multi_index(tuple(x - 1 for x in k), (2, 3, 2, 3))] = float(a)
    vout = np.zeros(36)
    for k, a in out.items():
        vout[np.ravel_multi_index(tuple(x - 1 for x in k), (2, 3, 2, 3))] = float(a)
    assert np.allclose(big @ vin, vout)
