'''
===============================================================================
Closed Form Solutions

Moments, steady energies and charging power of the driven battery in the
nonreciprocal resonant regime, where the charger evolves independently of the
battery and the battery is a filtered copy of the charger.
===============================================================================
'''
import math
import cmath
from dataclasses import dataclass
import numpy as np

from nrbattery.sysparams import EffectiveParams
from nrbattery.model import coupling_amplitudes
from nrbattery.momentmodel import steady_state, efficiency


REGIME_TOL = 1e-10
DEGENERATE_TOL = 1e-6


class NonpositiveRate(Exception):
    """NonpositiveRate: a total decay rate is zero or negative so the closed
    forms have no steady limit.
    """


class ConditionsNotMet(Exception):
    """ConditionsNotMet: the parameters are outside the regime where the
    closed forms hold.
    """
    def __init__(self, residuals: dict[str, float]) -> None:
        violated = ', '.join(f'{kk} = {vv:.3e}' for kk, vv in residuals.items())
        super().__init__(f'Closed forms need the nonreciprocal resonant regime, '
                         + f'violated: {violated}.')
        self.residuals = residuals


@dataclass(frozen=True)
class AnalyticCoefficients:
    """ Coefficients of the expanded battery population. a2, a3 and a4 are
    nan when the rates are degenerate, the moments then use their limits.
    """
    a1: float
    a2: float
    a3: float
    a4: float
    lambda_a: float
    lambda_b: float
    degenerate_equal: bool = False
    ''' |lambda_a - lambda_b| < 1e-6 max(lambda_a, lambda_b)
    '''
    degenerate_half: bool = False
    ''' |lambda_b - lambda_a/2| < 1e-6 max(lambda_a, lambda_b)
    '''

    @property
    def total(self) -> float:
        return self.a1 + self.a2 + self.a3 + self.a4


@dataclass(frozen=True)
class ClosedFormMoments:
    amp_a: np.ndarray
    amp_b: np.ndarray
    n_aa: np.ndarray
    n_bb: np.ndarray
    n_ab: np.ndarray


@dataclass(frozen=True)
class SteadyEnergies:
    energy_a: float
    energy_b: float
    efficiency: float
    ratio: float
    ''' E_B/E_A, nan without a drive.
    '''
    branch: str
    ''' 'closed_form' or 'linear_solve'.
    '''


def _check_rates(lambda_a: float, lambda_b: float) -> None:
    if lambda_a <= 0.0 or lambda_b <= 0.0:
        raise NonpositiveRate(f'Decay rates must be > 0, got lambda_a = {lambda_a}, '
                              + f'lambda_b = {lambda_b}.')


def regime_residuals(e: EffectiveParams) -> dict[str, float]:
    return {'backward': abs(coupling_amplitudes(e).backward),
            'delta_a_p': abs(e.delta_a_p),
            'delta_b_p': abs(e.delta_b_p)}


def _check_regime(e: EffectiveParams, keys: tuple[str, ...]) -> None:
    residuals = regime_residuals(e)
    violated = {kk: residuals[kk] for kk in keys if residuals[kk] > REGIME_TOL}
    if violated:
        raise ConditionsNotMet(violated)
    _check_rates(e.lambda_a, e.lambda_b)


def in_closed_form_regime(e: EffectiveParams) -> bool:
    return (all(vv <= REGIME_TOL for vv in regime_residuals(e).values())
            and e.lambda_a > 0.0 and e.lambda_b > 0.0)


def coefficients(lambda_a: float, lambda_b: float) -> AnalyticCoefficients:
    """coefficients: A1 to A4 of the expanded battery population.

    Raises:
        NonpositiveRate: a rate is <= 0.
    """
    _check_rates(lambda_a, lambda_b)

    scale = max(lambda_a, lambda_b)
    gap = lambda_a - lambda_b
    equal = abs(gap) < DEGENERATE_TOL*scale
    half = abs(lambda_b - lambda_a/2.0) < DEGENERATE_TOL*scale

    a1 = 1.0/(lambda_a + lambda_b) + lambda_a/(lambda_b*(lambda_a + lambda_b))
    if equal:
        return AnalyticCoefficients(a1, math.nan, math.nan, math.nan,
                                    lambda_a, lambda_b, equal, half)

    a2 = -2.0/lambda_b + lambda_a/(lambda_b*gap)
    a3 = -1.0/gap
    a4 = -lambda_a/(lambda_b*gap)
    return AnalyticCoefficients(a1, a2, a3, a4, lambda_a, lambda_b, equal, half)


def _rate_gap_term(t: np.ndarray, lambda_a: float,
                   lambda_b: float) -> np.ndarray:
    """(exp(-lambda_a t/2) - exp(-lambda_b t/2))/(lambda_a - lambda_b) with
    its series limit inside the degenerate band."""
    gap = lambda_a - lambda_b
    decay_b = np.exp(-lambda_b*t/2.0)
    if abs(gap) < DEGENERATE_TOL*max(lambda_a, lambda_b):
        return -(t/2.0)*decay_b*(1.0 - gap*t/4.0 + (gap*t)**2/24.0)
    return decay_b*np.expm1(-gap*t/2.0)/gap


def _battery_profile(t: np.ndarray,
                     e: EffectiveParams) -> tuple[np.ndarray, np.ndarray]:
    """Real profile X(t) with <b> = 4 i eps Gamma exp(i phi) X / lambda_a and
    its time derivative."""
    lam_a = e.lambda_a
    lam_b = e.lambda_b
    gap_term = _rate_gap_term(t, lam_a, lam_b)
    profile = -np.expm1(-lam_b*t/2.0)/lam_b + gap_term
    rate = (np.exp(-lam_b*t/2.0) - np.exp(-lam_a*t/2.0))/2.0 - lam_b*gap_term/2.0
    return (profile, rate)


def closed_form_moments(t: np.ndarray | float,
                        e: EffectiveParams) -> ClosedFormMoments:
    """closed_form_moments: moments of the vacuum-started battery in the
    nonreciprocal resonant regime. The populations and coherence are
    evaluated through the amplitudes, which equals the expanded A1 to A4 form
    and stays accurate as the two decay rates approach each other.

    Args:
        t (np.ndarray | float): times >= 0.
        e (EffectiveParams): effective parameters.

    Raises:
        ConditionsNotMet: backward coupling or detunings exceed 1e-10.
        NonpositiveRate: a decay rate is <= 0.

    Returns:
        ClosedFormMoments: arrays shaped like t.
    """
    _check_regime(e, ('backward', 'delta_a_p', 'delta_b_p'))

    tt = np.asarray(t, dtype=np.float64)
    lam_a = e.lambda_a
    eps = e.epsilon
    phase = cmath.exp(1j*e.phi)

    charge = -np.expm1(-lam_a*tt/2.0)
    amp_a = (-2j*eps/lam_a)*charge

    (profile, _) = _battery_profile(tt, e)
    amp_b = (4j*eps*e.gamma_diss*phase/lam_a)*profile

    n_aa = (4.0*eps**2/lam_a**2)*charge**2
    n_bb = (16.0*eps**2*e.gamma_diss**2/lam_a**2)*profile**2
    n_ab = (-8.0*eps**2*e.gamma_diss*phase/lam_a**2)*charge*profile

    return ClosedFormMoments(amp_a, amp_b, n_aa, n_bb, n_ab)


def charger_moments(t: np.ndarray | float,
                    e: EffectiveParams) -> tuple[np.ndarray, np.ndarray]:
    """charger_moments: <a> and <a^dag a> for a detuned charger. Only the
    nonreciprocal condition is needed since the charger then ignores the
    battery.

    Returns:
        tuple[np.ndarray, np.ndarray]: (amp_a, n_aa) shaped like t.
    """
    _check_regime(e, ('backward',))

    tt = np.asarray(t, dtype=np.float64)
    rate = complex(e.lambda_a/2.0, e.delta_a_p)
    amp_a = -1j*e.epsilon*(-np.expm1(-rate*tt))/rate

    decay = np.exp(-e.lambda_a*tt/2.0)
    n_aa = (e.epsilon**2/abs(rate)**2
            *(1.0 + decay**2 - 2.0*decay*np.cos(e.delta_a_p*tt)))
    return (amp_a, n_aa)


def battery_population_expanded(t: np.ndarray | float,
                                e: EffectiveParams) -> np.ndarray:
    """battery_population_expanded: <b^dag b> summed term by term from the
    A1 to A4 coefficients. Loses accuracy as (lambda_a/gap)**2 near equal
    rates, use closed_form_moments there.

    Raises:
        ConditionsNotMet: outside the regime or at degenerate rates.
    """
    _check_regime(e, ('backward', 'delta_a_p', 'delta_b_p'))
    coeffs = coefficients(e.lambda_a, e.lambda_b)
    if coeffs.degenerate_equal:
        raise ConditionsNotMet({'rate_gap': abs(e.lambda_a - e.lambda_b)})

    tt = np.asarray(t, dtype=np.float64)
    lam_a = e.lambda_a
    lam_b = e.lambda_b
    gap = lam_b - lam_a
    decay_bb = np.exp(-lam_b*tt)

    # A2/(lambda_b - lambda_a/2) written without the removable singularity
    half_coeff = -2.0/(lam_b*gap)

    bracket = (coeffs.a1/lam_b*(1.0 - decay_bb)
               + half_coeff*(np.exp(-lam_a*tt/2.0) - decay_bb)
               + coeffs.a3/gap*(np.exp(-lam_a*tt) - decay_bb)
               + 2.0*coeffs.a4/lam_b*(np.exp(-lam_b*tt/2.0) - decay_bb)
               - 2.0*coeffs.total/gap*(np.exp(-(lam_a + lam_b)*tt/2.0) - decay_bb))

    return (16.0*e.epsilon**2*e.gamma_diss**2/lam_a**2)*bracket


def coherence_expanded(t: np.ndarray | float,
                       e: EffectiveParams) -> np.ndarray:
    """coherence_expanded: <a^dag b> summed term by term from A1 to A4.

    Raises:
        ConditionsNotMet: outside the regime or at degenerate rates.
    """
    _check_regime(e, ('backward', 'delta_a_p', 'delta_b_p'))
    coeffs = coefficients(e.lambda_a, e.lambda_b)
    if coeffs.degenerate_equal:
        raise ConditionsNotMet({'rate_gap': abs(e.lambda_a - e.lambda_b)})

    tt = np.asarray(t, dtype=np.float64)
    lam_a = e.lambda_a
    lam_b = e.lambda_b
    decay_ab = np.exp(-(lam_a + lam_b)*tt/2.0)

    bracket = (coeffs.a1*(1.0 - decay_ab)
               + coeffs.a2*(np.exp(-lam_a*tt/2.0) - decay_ab)
               + coeffs.a3*(np.exp(-lam_a*tt) - decay_ab)
               + coeffs.a4*(np.exp(-lam_b*tt/2.0) - decay_ab))

    prefactor = -8.0*e.epsilon**2*e.gamma_diss*cmath.exp(1j*e.phi)/lam_a**2
    return prefactor*bracket


def steady_energies(e: EffectiveParams) -> SteadyEnergies:
    """steady_energies: long time charger and battery energies, in closed form
    inside the nonreciprocal resonant regime and from the linear steady state
    otherwise.

    Raises:
        NonpositiveRate: closed form branch with a rate <= 0.
        UnstableSystem: general branch without a steady state.
    """
    if in_closed_form_regime(e):
        lam_a = e.lambda_a
        lam_b = e.lambda_b
        weight = 16.0*e.omega_b*e.epsilon**2*e.gamma_diss**2
        energy_a = 4.0*e.omega_a*e.epsilon**2/lam_a**2
        energy_b = (weight/(lam_a**2*lam_b*(lam_a + lam_b))
                    + weight/(lam_a*lam_b**2*(lam_a + lam_b)))
        branch = 'closed_form'
    else:
        steady = steady_state(e)
        energy_a = steady.energy_a
        energy_b = steady.energy_b
        branch = 'linear_solve'

    ratio = math.nan if energy_a == 0.0 else energy_b/energy_a
    return SteadyEnergies(energy_a, energy_b,
                          float(efficiency(energy_a, energy_b)), ratio, branch)


def power_analytic(t: np.ndarray | float, e: EffectiveParams) -> np.ndarray:
    """power_analytic: exact time derivative of omega_b <b^dag b>.

    Raises:
        ConditionsNotMet: outside the nonreciprocal resonant regime.
    """
    _check_regime(e, ('backward', 'delta_a_p', 'delta_b_p'))
    tt = np.asarray(t, dtype=np.float64)
    (profile, rate) = _battery_profile(tt, e)
    weight = 16.0*e.omega_b*e.epsilon**2*e.gamma_diss**2/e.lambda_a**2
    return weight*2.0*profile*rate


def detuned_energy_ratio(e: EffectiveParams) -> float:
    """detuned_energy_ratio: steady E_B/E_A = Gamma^2/(delta_b_p^2 + lambda_b^2/4)
    under nonreciprocity (for omega_a = omega_b). With a resonant charger
    delta_b_p is the relative detuning.

    Raises:
        ConditionsNotMet: the backward coupling is not cancelled.
    """
    _check_regime(e, ('backward',))
    return (e.omega_b/e.omega_a*e.gamma_diss**2
            /(e.delta_b_p**2 + e.lambda_b**2/4.0))
