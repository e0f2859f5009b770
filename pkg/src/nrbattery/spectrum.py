'''
===============================================================================
Drift Matrix Spectrum and Exceptional Points

Eigenvalues and eigenvector coalescence of the effective 2x2 drift matrix and
a solver for the parameters where its discriminant vanishes.
===============================================================================
'''
import math
import cmath
import logging
from dataclasses import dataclass, replace
import numpy as np

from nrbattery.sysparams import EffectiveParams, ParamsError, reduce_phase
from nrbattery.model import coupling_amplitudes


logger = logging.getLogger(__name__)

FREE_VARS = ('j', 'phi', 'delta_b_p', 'r')
EP_TOL = 1e-12
EP_MAX_ITER = 100
CONTINUATION_STEP = 1e-3


class NoRealSolution(Exception):
    """NoRealSolution: the exceptional point condition has no real solution
    for the requested free variable.
    """


class NonConvergence(Exception):
    """NonConvergence: Newton iteration failed from every starting point.
    """
    def __init__(self, best_residual: float) -> None:
        super().__init__('Exceptional point solve did not converge, best '
                         + f'|discriminant| = {best_residual:.3e}.')
        self.best_residual = best_residual


@dataclass(frozen=True, eq=False)
class DriftMatrix:
    m: np.ndarray
    ''' 2x2 complex drift [[A, B], [C, D]].
    '''
    drive: np.ndarray
    ''' Complex drive vector (-i epsilon, 0).
    '''

    @property
    def a(self) -> complex:
        return complex(self.m[0, 0])

    @property
    def b(self) -> complex:
        return complex(self.m[0, 1])

    @property
    def c(self) -> complex:
        return complex(self.m[1, 0])

    @property
    def d(self) -> complex:
        return complex(self.m[1, 1])

    @property
    def trace(self) -> complex:
        return self.a + self.d

    @property
    def det(self) -> complex:
        return self.a*self.d - self.b*self.c

    @property
    def discriminant(self) -> complex:
        return (self.a - self.d)**2 + 4.0*self.b*self.c

    @property
    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.m)**2))


@dataclass(frozen=True)
class SpectralReport:
    lambda_plus: complex
    lambda_minus: complex
    eigvec_overlap: float
    discriminant: complex
    is_ep: bool


@dataclass(frozen=True)
class EPSolution:
    values: dict[str, float]
    residual: float
    overlap: float
    params: EffectiveParams


def drift_matrix(e: EffectiveParams) -> DriftMatrix:
    amps = coupling_amplitudes(e)
    mm = np.array([[complex(-e.lambda_a/2.0, -e.delta_a_p), amps.backward],
                   [amps.forward, complex(-e.lambda_b/2.0, -e.delta_b_p)]],
                  dtype=np.complex128)
    return DriftMatrix(mm, np.array([-1j*e.epsilon, 0.0], dtype=np.complex128))


def _eigenvector(dm: DriftMatrix, lam: complex) -> np.ndarray | None:
    cand_1 = np.array([dm.b, lam - dm.a])
    cand_2 = np.array([lam - dm.d, dm.c])
    norm_1 = np.linalg.norm(cand_1)
    norm_2 = np.linalg.norm(cand_2)
    if max(norm_1, norm_2) == 0.0:
        return None
    if norm_1 >= norm_2:
        return cand_1/norm_1
    return cand_2/norm_2


def spectral(dm: DriftMatrix, tol: float = 1e-8) -> SpectralReport:
    """spectral: eigenvalues from the characteristic polynomial, with the
    second root taken from det/lambda to avoid cancellation.

    Args:
        dm (DriftMatrix): drift matrix.
        tol (float, optional): EP tolerance relative to the squared Frobenius
            norm. Defaults to 1e-8.

    Returns:
        SpectralReport: eigenvalues, eigenvector overlap and EP flag.
    """
    half_trace = dm.trace/2.0
    disc = dm.discriminant
    root = cmath.sqrt(disc)/2.0

    plus_larger = abs(half_trace + root) >= abs(half_trace - root)
    lam_1 = half_trace + root if plus_larger else half_trace - root
    lam_2 = dm.det/lam_1 if lam_1 != 0 else half_trace - root

    if plus_larger:
        (lam_plus, lam_minus) = (lam_1, lam_2)
    else:
        (lam_plus, lam_minus) = (lam_2, lam_1)

    coalesced = abs(disc) < tol*dm.norm_sq
    scalar = dm.b == 0 and dm.c == 0 and dm.a == dm.d

    if scalar:
        overlap = 0.0
    elif coalesced:
        overlap = 1.0
    else:
        vec_p = _eigenvector(dm, lam_plus)
        vec_m = _eigenvector(dm, lam_minus)
        if vec_p is None or vec_m is None:
            overlap = 0.0
        else:
            overlap = float(min(1.0, abs(np.vdot(vec_p, vec_m))))

    is_ep = coalesced and not scalar and overlap > 1.0 - tol
    return SpectralReport(lam_plus, lam_minus, overlap, disc, is_ep)


def _get_var(e: EffectiveParams, name: str) -> float:
    if name == 'r':
        if e.kappa_a <= 0.0:
            raise ParamsError('Damping ratio is undefined for kappa_a = 0.')
        return e.kappa_b/e.kappa_a
    return getattr(e, name)


def _set_var(e: EffectiveParams, name: str, value: float) -> EffectiveParams:
    if name == 'j':
        return e.with_coupling(j=value)
    if name == 'phi':
        return e.with_coupling(phi=value)
    if name == 'delta_b_p':
        return replace(e, delta_b_p=value)
    return e.with_damping_ratio(value)


def _disc_gradient(e: EffectiveParams, name: str) -> complex:
    dm = drift_matrix(e)
    half_gamma = e.gamma_diss/2.0
    if name == 'j':
        return -4j*(dm.b + dm.c)
    if name == 'phi':
        d_b = complex(e.g_coh, half_gamma)*cmath.exp(-1j*e.phi)
        d_c = complex(-e.g_coh, -half_gamma)*cmath.exp(1j*e.phi)
        return 4.0*(d_b*dm.c + dm.b*d_c)
    if name == 'delta_b_p':
        return 2j*(dm.a - dm.d)
    return (dm.a - dm.d)*e.kappa_a


def _closed_form_applies(e: EffectiveParams, free: tuple[str, ...]) -> bool:
    if free != ('j',):
        return False
    delta = e.detuning
    gap = e.lambda_a - e.lambda_b
    scale = e.gamma_diss**2 + delta**2 + gap**2
    return (abs(e.g_coh) <= EP_TOL*max(e.gamma_diss, 1.0)
            and abs(e.phi - math.pi/2.0) <= EP_TOL
            and abs(delta*gap) <= EP_TOL*scale)


def closed_form_j_ep(e: EffectiveParams) -> float:
    """closed_form_j_ep: J at the exceptional point for phi = pi/2, G = 0
    and a real discriminant, 0.5*sqrt(Gamma^2 - delta^2 + gap^2/4).

    Raises:
        NoRealSolution: the radicand is negative.
    """
    delta = e.detuning
    gap = e.lambda_a - e.lambda_b
    radicand = e.gamma_diss**2 - delta**2 + gap**2/4.0
    if radicand < 0.0:
        if radicand >= -EP_TOL*max(e.gamma_diss**2, delta**2):
            radicand = 0.0
        else:
            raise NoRealSolution(f'No real J at the exceptional point, radicand '
                                 + f'{radicand:.3e} < 0 for detuning {delta} '
                                 + f'and dissipative coupling {e.gamma_diss}.')
    return 0.5*math.sqrt(radicand)


def _seeds(e: EffectiveParams, name: str) -> tuple[float, float, float]:
    current = _get_var(e, name)
    if name == 'j':
        return (current, e.gamma_diss/2.0, max(e.gamma_diss, abs(e.g_coh), 1e-3))
    if name == 'phi':
        return (current, math.pi/2.0, math.pi/4.0)
    if name == 'delta_b_p':
        return (current, e.delta_a_p, e.delta_a_p + e.gamma_diss/2.0)
    return (current, 1.0, 10.0)


def ep_tolerance(dm: DriftMatrix, tol: float = EP_TOL) -> float:
    """ep_tolerance: |discriminant| threshold scaled by max(1, |m|_F^2) so
    that the frequency unit cancels.
    """
    return tol*max(1.0, dm.norm_sq)


def _newton(e: EffectiveParams,
            free: tuple[str, ...],
            start: np.ndarray,
            tol: float,
            max_iter: int) -> tuple[np.ndarray, float, bool, EffectiveParams]:
    xx = start.astype(np.float64).copy()
    ee = e
    for nn, xv in zip(free, xx):
        ee = _set_var(ee, nn, xv)
    dm = drift_matrix(ee)
    disc = dm.discriminant

    for _ in range(max_iter):
        if abs(disc) < ep_tolerance(dm, tol):
            break
        jac = np.empty((2, len(free)))
        for kk, nn in enumerate(free):
            grad = _disc_gradient(ee, nn)
            jac[:, kk] = (grad.real, grad.imag)
        (step, *_) = np.linalg.lstsq(jac, -np.array([disc.real, disc.imag]),
                                     rcond=None)
        if not np.all(np.isfinite(step)):
            break
        xx = xx + step
        ee = e
        for nn, xv in zip(free, xx):
            ee = _set_var(ee, nn, xv)
        dm = drift_matrix(ee)
        disc = dm.discriminant

    return (xx, abs(disc), abs(disc) < ep_tolerance(dm, tol), ee)


def _solution(ee: EffectiveParams, free: tuple[str, ...]) -> EPSolution:
    dm = drift_matrix(ee)
    report = spectral(dm)
    values = {nn: _get_var(ee, nn) for nn in free}
    return EPSolution(values, abs(dm.discriminant), report.eigvec_overlap, ee)


def _normalise_free(free: tuple[str, ...] | list[str] | str) -> tuple[str, ...]:
    if isinstance(free, str):
        free = (free,)
    names = tuple(ff.lower() for ff in free)
    if not 1 <= len(names) <= 2 or len(set(names)) != len(names):
        raise ValueError(f'Need one or two distinct free variables, got {names}.')
    for nn in names:
        if nn not in FREE_VARS:
            raise ValueError(f'Unknown free variable "{nn}", expected one of {FREE_VARS}.')
    return names


def solve_ep(e: EffectiveParams,
             free: tuple[str, ...] | list[str] | str = ('j',),
             span: tuple[float, float] | None = None,
             tol: float = EP_TOL,
             max_iter: int = EP_MAX_ITER,
             use_closed_form: bool = True) -> list[EPSolution]:
    """solve_ep: finds real values of the free variables that zero the
    complex discriminant of the drift matrix.

    Args:
        e (EffectiveParams): effective parameters, fixed variables are read
            from here.
        free: one or two of 'j', 'phi', 'delta_b_p', 'r'.
        span (tuple[float, float] | None, optional): with two free variables,
            range of the second one to trace the curve of the first over.
            Defaults to None which solves for isolated points.
        tol (float, optional): |discriminant| tolerance, scaled by
            max(1, |m|_F^2). Defaults to 1e-12.
        max_iter (int, optional): Newton iterations per start. Defaults to 100.
        use_closed_form (bool, optional): allow the closed form for J.
            Defaults to True.

    Raises:
        NoRealSolution: closed form J with a negative radicand.
        NonConvergence: no Newton start converged.

    Returns:
        list[EPSolution]: distinct solutions.
    """
    names = _normalise_free(free)

    if len(names) == 2 and span is not None:
        curve = trace_ep_curve(e, names[0], names[1], span[0], span[1],
                               tol=tol, max_iter=max_iter)
        return [ss for ss in curve if ss is not None]

    if use_closed_form and _closed_form_applies(e, names):
        ee = e.with_coupling(j=closed_form_j_ep(e))
        return [_solution(ee, names)]

    seeds = [_seeds(e, nn) for nn in names]
    starts = [np.array([ss[kk] for ss in seeds]) for kk in range(3)]

    solutions = list([])
    best = math.inf
    for start in starts:
        try:
            (xx, resid, converged, ee) = _newton(e, names, start, tol, max_iter)
        except ParamsError:
            continue
        best = min(best, resid)
        if not converged:
            continue
        if 'phi' in names:
            ee = ee.with_coupling(phi=reduce_phase(ee.phi))
            xx = np.array([_get_var(ee, nn) for nn in names])
        duplicate = any(np.allclose(xx, [ss.values[nn] for nn in names],
                                    rtol=1e-8, atol=1e-12)
                        for ss in solutions)
        if not duplicate:
            solutions.append(_solution(ee, names))

    if not solutions:
        raise NonConvergence(best)

    logger.info('Found %d exceptional point solution(s) for %s',
                len(solutions), ', '.join(names))
    return solutions


def trace_ep_curve(e: EffectiveParams,
                   solve_for: str,
                   sweep_var: str,
                   start: float,
                   stop: float,
                   step: float = CONTINUATION_STEP,
                   tol: float = EP_TOL,
                   max_iter: int = EP_MAX_ITER) -> list[EPSolution | None]:
    """trace_ep_curve: follows the exceptional point in solve_for while
    sweep_var steps from start to stop. Each point seeds Newton with the
    previous solution; points without a real solution are None.
    """
    (solve_for, sweep_var) = _normalise_free((solve_for, sweep_var))
    n_steps = max(1, int(round(abs(stop - start)/step)))
    sweep = np.linspace(start, stop, n_steps + 1)

    curve = list([])
    previous: float | None = None
    for val in sweep:
        try:
            ee = _set_var(e, sweep_var, float(val))
        except ParamsError:
            curve.append(None)
            continue

        if previous is not None:
            ee = _set_var(ee, solve_for, previous)

        try:
            if previous is None and _closed_form_applies(ee, (solve_for,)):
                sol = solve_ep(ee, (solve_for,), tol=tol, max_iter=max_iter)[0]
            else:
                (_, _, converged, sol_e) = _newton(ee, (solve_for,),
                                                   np.array([_get_var(ee, solve_for)]),
                                                   tol, max_iter)
                if not converged:
                    sol = solve_ep(ee, (solve_for,), tol=tol, max_iter=max_iter)[0]
                else:
                    sol = _solution(sol_e, (solve_for,))
        except (NoRealSolution, NonConvergence, ParamsError):
            curve.append(None)
            previous = None
            continue

        sol.values[sweep_var] = float(val)
        curve.append(sol)
        previous = sol.values[solve_for]

    return curve
