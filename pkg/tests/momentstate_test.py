'''
==============================================================================
TEST: MomentState and packing
==============================================================================
'''
import numpy as np
import pytest
from nrbattery.momentstate import (MomentState,
                                   MomentStateError,
                                   DimensionMismatch,
                                   pack_state,
                                   unpack_state)


def test_vacuum() -> None:
    state = MomentState.vacuum(3)
    assert state.n_modes == 3
    assert np.all(state.first == 0.0)
    assert state.second.shape == (3, 3)
    assert state.factorization_error() == 0.0


def test_coherent() -> None:
    state = MomentState.coherent([1.0 + 2.0j, -0.5j])
    assert state.second[0, 0] == pytest.approx(5.0)
    assert state.second[0, 1] == pytest.approx((1.0 - 2.0j)*(-0.5j))
    assert state.second[1, 0] == pytest.approx(np.conj(state.second[0, 1]))
    assert state.factorization_error() == 0.0
    state.check()


def test_dimension_mismatch() -> None:
    with pytest.raises(DimensionMismatch) as err_info:
        MomentState(np.zeros(2), np.zeros((3, 3)))

    (msg,) = err_info.value.args
    assert msg == 'First moments of shape (2,) do not match second moments of shape (3, 3).'
    assert isinstance(err_info.value, MomentStateError)


def test_check_not_hermitian() -> None:
    state = MomentState(np.zeros(2), np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(MomentStateError) as err_info:
        state.check()

    (msg,) = err_info.value.args
    assert msg == 'Second moments are not Hermitian, deviation 1.000e+00.'


def test_check_negative_population() -> None:
    state = MomentState(np.zeros(2), np.diag([-1.0, 0.0]))
    with pytest.raises(MomentStateError):
        state.check()


def test_factorization_error() -> None:
    state = MomentState.coherent([1.0, 1.0j])
    state.second[1, 1] += 0.25
    assert state.factorization_error() == pytest.approx(0.25)


@pytest.mark.parametrize('n_modes', (2, 3))
def test_pack_unpack(n_modes: int) -> None:
    rng = np.random.default_rng(7)
    amps = rng.normal(size=n_modes) + 1j*rng.normal(size=n_modes)
    state = MomentState.coherent(amps)

    vec = pack_state(state.first, state.second)
    assert vec.shape == (n_modes + n_modes*(n_modes + 1)//2,)

    (first, second) = unpack_state(vec, n_modes)
    np.testing.assert_allclose(first, state.first)
    np.testing.assert_allclose(second, state.second, atol=1e-15)
    assert np.all(second.diagonal().imag == 0.0)
