'''
==============================================================================
TEST: Moment integrator
==============================================================================
'''
from dataclasses import replace
import numpy as np
import pytest
from nrbattery.sysparams import baseline
from nrbattery.momentstate import MomentState, DimensionMismatch
from nrbattery.momentmodel import EffectiveModel, FullModel
from nrbattery.integrator import (integrate,
                                  output_grid,
                                  observables,
                                  IntegratorConfig,
                                  StepSizeUnderflow)
from nrbattery.analytic import closed_form_moments
from nrbattery.spectrum import drift_matrix, spectral
import tests.batterychecker as bc


@pytest.fixture
def effective_model() -> EffectiveModel:
    return EffectiveModel(bc.baseline_effective())


def test_output_grid() -> None:
    grid = output_grid(10.0, 11)
    np.testing.assert_allclose(grid, np.arange(11.0))


@pytest.mark.parametrize(
    ('t_end', 'samples', 'expected'),
    (
        (0.0, 11, 't_end must be > 0, got 0.0.'),
        (1.0, 1, 'Need at least 2 samples, got 1.'),
    )
)
def test_output_grid_err(t_end: float, samples: int, expected: str) -> None:
    with pytest.raises(ValueError) as err_info:
        output_grid(t_end, samples)

    (msg,) = err_info.value.args
    assert msg == expected


def test_config_err() -> None:
    with pytest.raises(ValueError) as err_info:
        IntegratorConfig(method='Euler')

    (msg,) = err_info.value.args
    assert msg == 'Unknown integration method "Euler".'


def test_config_scaled() -> None:
    config = IntegratorConfig().scaled(0.1)
    assert config.rtol == pytest.approx(1e-10)
    assert config.atol == pytest.approx(1e-13)
    assert config.method == 'DOP853'


def test_integrate_shapes(effective_model: EffectiveModel) -> None:
    traj = integrate(effective_model, t_end=bc.T_END, samples=bc.SAMPLES)
    assert traj.n_samples == bc.SAMPLES
    assert traj.n_modes == 2
    assert traj.model == 'effective'
    assert traj.has_observables()
    assert traj.times[0] == 0.0
    assert traj.times[-1] == bc.T_END
    assert np.all(traj.first[0] == 0.0)


@pytest.mark.parametrize('method', ('DOP853', 'RK45', 'RK4'))
def test_integrate_matches_closed_form(effective_model: EffectiveModel,
                                       method: str) -> None:
    config = IntegratorConfig(method=method, rtol=1e-10, atol=1e-13, max_step=0.25)
    traj = integrate(effective_model, t_end=bc.T_END, samples=bc.SAMPLES, config=config)
    mom = closed_form_moments(traj.times, bc.baseline_effective())

    assert bc.rel_dev(traj.first[:, 0], mom.amp_a) < 1e-6
    assert bc.rel_dev(traj.first[:, 1], mom.amp_b) < 1e-6
    assert bc.rel_dev(traj.second[:, 1, 1], mom.n_bb) < 1e-6
    assert bc.rel_dev(traj.second[:, 0, 1], mom.n_ab) < 1e-6


def test_integrate_custom_times(effective_model: EffectiveModel) -> None:
    times = np.array([10.0, 50.0, 150.0])
    traj = integrate(effective_model, times=times)
    mom = closed_form_moments(times, bc.baseline_effective())
    np.testing.assert_allclose(traj.energy_b, mom.n_bb, rtol=1e-6)


@pytest.mark.parametrize('times', (np.array([0.0, 2.0, 1.0]),
                                   np.array([-1.0, 1.0]),
                                   np.array([1.0])))
def test_integrate_bad_times(effective_model: EffectiveModel,
                             times: np.ndarray) -> None:
    with pytest.raises(ValueError) as err_info:
        integrate(effective_model, times=times)

    (msg,) = err_info.value.args
    assert msg == 'Output times must be strictly increasing from t >= 0.'


def test_integrate_needs_grid(effective_model: EffectiveModel) -> None:
    with pytest.raises(ValueError) as err_info:
        integrate(effective_model)

    (msg,) = err_info.value.args
    assert msg == 'Either t_end or times must be given.'


def test_integrate_dimension_mismatch(effective_model: EffectiveModel) -> None:
    with pytest.raises(DimensionMismatch) as err_info:
        integrate(effective_model, MomentState.vacuum(3), t_end=1.0)

    (msg,) = err_info.value.args
    assert msg == 'effective model has 2 modes, initial state has 3.'


def test_vacuum_start_stays_coherent() -> None:
    traj = integrate(FullModel(baseline()), t_end=bc.T_END, samples=bc.SAMPLES,
                     config=IntegratorConfig(rtol=1e-12, atol=1e-14))
    assert max(ss.factorization_error() for ss in traj.states()) < 1e-8


def test_closed_system_conserves_energy() -> None:
    eff = bc.closed_system()
    traj = integrate(EffectiveModel(eff), MomentState.coherent([1.0, 0.0]),
                     t_end=50.0/eff.j, samples=201,
                     config=IntegratorConfig(rtol=1e-12, atol=1e-14))
    total = traj.energy_a + traj.energy_b
    assert np.max(np.abs(total - 1.0)) < 1e-9
    # full swap at Jt = pi/2
    swap = integrate(EffectiveModel(eff), MomentState.coherent([1.0, 0.0]),
                     times=np.array([0.0, np.pi/2/eff.j]),
                     config=IntegratorConfig(rtol=1e-12, atol=1e-14))
    assert swap.energy_b[-1] == pytest.approx(1.0, rel=1e-9)


def test_step_size_underflow(effective_model: EffectiveModel) -> None:
    config = IntegratorConfig(min_step=1e3)
    with pytest.raises(StepSizeUnderflow) as err_info:
        integrate(effective_model, t_end=bc.T_END, config=config)

    assert 0.0 < err_info.value.t_reached < bc.T_END


def test_observables_power() -> None:
    eff = bc.baseline_effective()
    traj = integrate(EffectiveModel(eff), t_end=bc.T_END, samples=2001)
    traj = observables(traj, 2.0, 3.0)
    np.testing.assert_allclose(traj.energy_b, 3.0*traj.second[:, 1, 1].real)
    assert traj.power[1000] == pytest.approx(
        (traj.energy_b[1001] - traj.energy_b[999])/(traj.times[1001] - traj.times[999]))


def test_free_decay_rate_matches_spectrum() -> None:
    eff = replace(bc.baseline_effective().with_coupling(phi=0.0), epsilon=0.0)
    report = spectral(drift_matrix(eff))
    slowest = max(report.lambda_plus.real, report.lambda_minus.real)

    traj = integrate(EffectiveModel(eff), initial=MomentState.coherent([1.0, 0.0]),
                     t_end=800.0, samples=801,
                     config=IntegratorConfig(rtol=1e-11, atol=1e-14))
    late = traj.times >= 400.0
    (slope, _) = np.polyfit(traj.times[late], np.log(np.abs(traj.first[late, 1])), 1)

    assert slowest < 0.0
    assert slope == pytest.approx(slowest, rel=1e-2)
