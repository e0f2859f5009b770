'''
===============================================================================
Moment Integrator

Adaptive embedded Runge-Kutta integration of the moment equations with dense
output sampling, plus a fixed-step classical RK4 mode for reproducibility.
===============================================================================
'''
import math
import logging
from dataclasses import dataclass, replace
import numpy as np
from scipy.integrate import DOP853, RK45

from nrbattery.momentstate import (MomentState,
                                   Trajectory,
                                   DimensionMismatch,
                                   pack_state,
                                   unpack_state)
from nrbattery.momentmodel import MomentModel, moment_derivative, efficiency


logger = logging.getLogger(__name__)

_ADAPTIVE = {'DOP853': DOP853, 'RK45': RK45}


class StepSizeUnderflow(Exception):
    """StepSizeUnderflow: the step size controller could not meet the
    requested tolerance.
    """
    def __init__(self, t_reached: float, message: str = '') -> None:
        super().__init__(f'Step size underflow at t = {t_reached:.6g}. {message}'.strip())
        self.t_reached = t_reached


@dataclass(frozen=True)
class IntegratorConfig:
    """ Integrator options.
    """
    method: str = 'DOP853'
    ''' 'DOP853' or 'RK45' for the adaptive solvers, 'RK4' for fixed steps.
    '''

    rtol: float = 1e-9
    atol: float = 1e-12

    min_step: float = 1e-12
    ''' Smallest step the adaptive controller may take before giving up.
    '''

    max_step: float = 0.5
    ''' Largest step of the fixed-step RK4 mode, each output interval is split
    into equal steps no longer than this.
    '''

    def __post_init__(self) -> None:
        if self.method not in _ADAPTIVE and self.method != 'RK4':
            raise ValueError(f'Unknown integration method "{self.method}".')
        if self.rtol <= 0.0 or self.atol <= 0.0:
            raise ValueError('Integrator tolerances must be > 0.')
        if self.max_step <= 0.0:
            raise ValueError('RK4 max_step must be > 0.')

    def scaled(self, factor: float) -> 'IntegratorConfig':
        return replace(self, rtol=self.rtol*factor, atol=self.atol*factor)


def output_grid(t_end: float, samples: int = 2001) -> np.ndarray:
    if t_end <= 0.0:
        raise ValueError(f't_end must be > 0, got {t_end}.')
    if samples < 2:
        raise ValueError(f'Need at least 2 samples, got {samples}.')
    return np.linspace(0.0, t_end, samples)


class _PackedRhs:
    """Right hand side on the packed state vector, drift and drive are built
    once per integration."""
    def __init__(self, model: MomentModel) -> None:
        self._n = model.n_modes
        self._drift = model.drift()
        self._drive = model.drive()
        self.n_evals = 0

    def __call__(self, _t: float, vec: np.ndarray) -> np.ndarray:
        self.n_evals += 1
        (first, second) = unpack_state(vec, self._n)
        (d_first, d_second) = moment_derivative(self._drift, self._drive,
                                                first, second)
        return pack_state(d_first, d_second)


def _run_adaptive(fun: _PackedRhs,
                  y0: np.ndarray,
                  times: np.ndarray,
                  config: IntegratorConfig) -> np.ndarray:
    t_end = float(times[-1])
    out = np.empty((times.shape[0], y0.shape[0]), dtype=np.complex128)

    n_done = int(np.searchsorted(times, 0.0, side='right'))
    out[:n_done] = y0

    solver = _ADAPTIVE[config.method](fun, 0.0, y0, t_end,
                                      rtol=config.rtol, atol=config.atol)
    n_steps = 0
    while solver.status == 'running':
        message = solver.step()
        n_steps += 1
        if solver.status == 'failed':
            raise StepSizeUnderflow(solver.t, str(message))
        if (solver.status == 'running' and solver.step_size is not None
            and solver.step_size < config.min_step):
            raise StepSizeUnderflow(solver.t, f'Step {solver.step_size:.3e} '
                                    + f'is below {config.min_step:.3e}.')

        n_next = int(np.searchsorted(times, solver.t, side='right'))
        if n_next > n_done:
            dense = solver.dense_output()
            out[n_done:n_next] = dense(times[n_done:n_next]).T
            n_done = n_next

    logger.debug('%s took %d steps, %d rhs evaluations to t = %g',
                 config.method, n_steps, fun.n_evals, t_end)
    return out


def _rk4_step(fun: _PackedRhs, t: float, y: np.ndarray, h: float) -> np.ndarray:
    k1 = fun(t, y)
    k2 = fun(t + h/2.0, y + h*k1/2.0)
    k3 = fun(t + h/2.0, y + h*k2/2.0)
    k4 = fun(t + h, y + h*k3)
    return y + h*(k1 + 2.0*k2 + 2.0*k3 + k4)/6.0


def _run_rk4(fun: _PackedRhs,
             y0: np.ndarray,
             times: np.ndarray,
             config: IntegratorConfig) -> np.ndarray:
    out = np.empty((times.shape[0], y0.shape[0]), dtype=np.complex128)
    tt = 0.0
    yy = y0.copy()
    for ii, t_out in enumerate(times):
        span = float(t_out) - tt
        if span > 0.0:
            n_sub = max(1, math.ceil(span/config.max_step))
            hh = span/n_sub
            for kk in range(n_sub):
                yy = _rk4_step(fun, tt + kk*hh, yy, hh)
            tt = float(t_out)
        out[ii] = yy
    return out


def integrate(model: MomentModel,
              initial: MomentState | None = None,
              t_end: float | None = None,
              times: np.ndarray | None = None,
              samples: int = 2001,
              config: IntegratorConfig | None = None) -> Trajectory:
    """integrate: solves the moment equations of a model from t = 0 and
    samples the solution on an output grid. Second moments are rebuilt
    Hermitian from their upper triangle at every evaluation.

    Args:
        model (MomentModel): effective or full model.
        initial (MomentState | None, optional): initial moments. Defaults to
            None which is the vacuum.
        t_end (float | None, optional): end time, used with samples to build a
            uniform grid when times is None.
        times (np.ndarray | None, optional): strictly increasing output times
            starting at t >= 0. Defaults to None.
        samples (int, optional): number of uniform samples. Defaults to 2001.
        config (IntegratorConfig | None, optional): Defaults to None.

    Raises:
        DimensionMismatch: initial state does not match the model.
        StepSizeUnderflow: the adaptive controller failed.
        ValueError: invalid output grid.

    Returns:
        Trajectory: sampled moments with observables filled in.
    """
    if config is None:
        config = IntegratorConfig()

    if times is None:
        if t_end is None:
            raise ValueError('Either t_end or times must be given.')
        times = output_grid(t_end, samples)
    else:
        times = np.asarray(times, dtype=np.float64)
        if (times.ndim != 1 or times.shape[0] < 2 or times[0] < 0.0
            or np.any(np.diff(times) <= 0.0)):
            raise ValueError('Output times must be strictly increasing from t >= 0.')

    if initial is None:
        initial = MomentState.vacuum(model.n_modes)
    if initial.n_modes != model.n_modes:
        raise DimensionMismatch(f'{model.name} model has {model.n_modes} modes, '
                                + f'initial state has {initial.n_modes}.')
    initial.check()

    fun = _PackedRhs(model)
    y0 = pack_state(initial.first, initial.second)

    if config.method == 'RK4':
        packed = _run_rk4(fun, y0, times, config)
    else:
        packed = _run_adaptive(fun, y0, times, config)

    n_modes = model.n_modes
    first = np.empty((times.shape[0], n_modes), dtype=np.complex128)
    second = np.empty((times.shape[0], n_modes, n_modes), dtype=np.complex128)
    for ii, vec in enumerate(packed):
        (first[ii], second[ii]) = unpack_state(vec, n_modes)

    traj = Trajectory(times=times, first=first, second=second, model=model.name,
                      meta={'method': config.method,
                            'rtol': config.rtol,
                            'atol': config.atol})
    (omega_a, omega_b) = model.frequencies()
    return observables(traj, omega_a, omega_b)


def observables(traj: Trajectory, omega_a: float = 1.0,
                omega_b: float = 1.0) -> Trajectory:
    """observables: fills in E_A, E_B, the efficiency and the finite
    difference charging power (centred inside, one-sided at the ends).
    """
    traj.energy_a = omega_a*traj.second[:, 0, 0].real
    traj.energy_b = omega_b*traj.second[:, 1, 1].real
    traj.efficiency = efficiency(traj.energy_a, traj.energy_b)
    traj.power = np.gradient(traj.energy_b, traj.times)
    return traj
