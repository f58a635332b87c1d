from fractions import Fraction

import pytest

from replicasym import state_library as sl
from replicasym.replica_state import norm_sq


@pytest.mark.parametrize(
    "state",
    [
        sl.bell(), sl.ghz(), sl.ghz(3, 3), sl.ghz(5, 5), sl.w_qubit(), sl.w_qubit(5), sl.w3_threelevel(),
        sl.aharonov(3), sl.aharonov(4), sl.aharonov_plus3(), sl.schmidt_state(["1/2", "1/3", "1/6"]),
        sl.biseparable(["1/5", "2/5", "2/5"], phi_dim=2, phi_index=2), sl.product_state((2, 3), (2, 3)),
    ],
)
def test_exact_and_normalized(state):
    assert state.exact
    assert norm_sq(state) == 1


def test_names():
    assert sl.ghz().name == "ghz"
    assert sl.ghz(3, 3).name == "ghz3"
    assert sl.aharonov(3).name == "chi3"
    assert sl.aharonov_plus3().name == "chi3plus"
    assert sl.w3_threelevel().name == "w3"
    assert sl.bell().name == "bell"


def test_float_lambdas_refused():
    with pytest.raises(ValueError, match="exact rational"):
        sl.schmidt_state([0.5, 0.5])


def test_lambda_validation():
    with pytest.raises(ValueError, match="sum"):
        sl.schmidt_state(["1/2", "1/3"])
    with pytest.raises(ValueError):
        sl.schmidt_state(["1", "0"])
    with pytest.raises(ValueError):
        sl.schmidt_state(["-1/2", "3/2"])
    with pytest.raises(ValueError):
        sl.schmidt_state(["x"])
    with pytest.raises(ValueError):
        sl.schmidt_state(["1"], dim=0)


def test_aharonov_signs():
    chi = sl.aharonov(3)
    assert chi.amplitude((1, 2, 3)) == -chi.amplitude((2, 1, 3))
    assert chi.amplitude((2, 3, 1)) == chi.amplitude((1, 2, 3))
    assert len(chi) == 6
    assert len(sl.aharonov(4)) == 24


def test_biseparable_zero_coefficient_drops_term():
    bs = sl.biseparable([Fraction(1, 2), Fraction(1, 2), 0])
    assert len(bs) == 2
    assert bs.dims == (3, 3, 3)
    with pytest.raises(ValueError):
        sl.biseparable(["1/2", "1/2"], phi_dim=2, phi_index=3)


def test_schmidt_padding():
    st = sl.schmidt_state(["1/2", "1/2"], dim=3)
    assert st.dims == (3, 3) and len(st) == 2


def test_ghz_w_kets():
    assert set(sl.w_qubit(3).terms) == {(2, 1, 1), (1, 2, 1), (1, 1, 2)}
    assert set(sl.ghz(3, 3).terms) == {(1, 1, 1), (2, 2, 2), (3, 3, 3)}
    with pytest.raises(ValueError):
        sl.ghz(1)
