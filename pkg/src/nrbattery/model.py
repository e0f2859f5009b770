'''
===============================================================================
Model Reduction and Nonreciprocity

Eliminates the reservoir mode to obtain the effective charger/battery
couplings and solves for the direct coupling and phase that make the
effective coupling one-way.
===============================================================================
'''
import math
import cmath
from dataclasses import dataclass, replace

from nrbattery.sysparams import SystemParams, EffectiveParams, reduce_phase


NONRECIPROCAL_TOL = 1e-12


class ModelError(Exception):
    """ModelError: custom error class for model reduction and coupling
    solves.
    """


class IncompatiblePhase(ModelError):
    """IncompatiblePhase: a pinned phase admits no real direct coupling that
    cancels the backward amplitude.
    """
    def __init__(self, phi: float, residual: float) -> None:
        super().__init__(f'Phase {phi} admits no real J for nonreciprocity, '
                         + f'residual {residual:.3e}.')
        self.phi = phi
        self.residual = residual


@dataclass(frozen=True)
class RegimeReport:
    """ Adiabatic elimination margins. Report only, a failed check never
    blocks a computation.
    """
    decay_margin: float
    ''' gamma_m / max(kappa_a, kappa_b), infinite when both are zero.
    '''

    coupling_margin: float
    ''' |delta_c - i gamma_m/2| / max(g_a, g_b), infinite when both are zero.
    '''

    decay_threshold: float = 10.0
    coupling_threshold: float = 10.0

    @property
    def decay_ok(self) -> bool:
        return self.decay_margin >= self.decay_threshold

    @property
    def coupling_ok(self) -> bool:
        return self.coupling_margin >= self.coupling_threshold

    @property
    def ok(self) -> bool:
        return self.decay_ok and self.coupling_ok


@dataclass(frozen=True)
class CouplingAmplitudes:
    """ Cross terms of the first moment equations. forward multiplies <a> in
    the <b> equation and backward multiplies <b> in the <a> equation.
    """
    forward: complex
    backward: complex

    @property
    def isolation_ratio(self) -> float:
        """|backward|/|forward|, infinite for a purely backward coupling and
        1 when both vanish."""
        if self.forward == 0:
            return math.inf if self.backward != 0 else 1.0
        return abs(self.backward)/abs(self.forward)


@dataclass(frozen=True)
class NonreciprocalSolution:
    j: float
    phi: float
    residual: float


def reduce_to_effective(p: SystemParams) -> EffectiveParams:
    """reduce_to_effective: projects the three-mode system onto the
    charger/battery subspace with gamma = gamma_m/2.

    Args:
        p (SystemParams): three-mode parameters.

    Returns:
        EffectiveParams: shifted detunings, induced decays and couplings.
    """
    gamma = p.gamma_m/2.0
    denom = p.delta_c**2 + gamma**2

    return EffectiveParams(
        delta_a_p=p.delta_a - p.g_a**2*p.delta_c/denom,
        delta_b_p=p.delta_b - p.g_b**2*p.delta_c/denom,
        gamma_a_eff=p.g_a**2*gamma/denom,
        gamma_b_eff=p.g_b**2*gamma/denom,
        g_coh=p.g_a*p.g_b*p.delta_c/denom,
        gamma_diss=gamma*p.g_a*p.g_b/denom,
        j=p.j,
        phi=p.phi,
        epsilon=p.epsilon,
        kappa_a=p.kappa_a,
        kappa_b=p.kappa_b,
        omega_a=p.omega_a,
        omega_b=p.omega_b,
    )


def validate_adiabatic(p: SystemParams,
                       decay_threshold: float = 10.0,
                       coupling_threshold: float = 10.0) -> RegimeReport:
    """validate_adiabatic: checks the reservoir is fast compared with the
    local damping and strong coupling rates.
    """
    kappa_max = max(p.kappa_a, p.kappa_b)
    g_max = max(p.g_a, p.g_b)

    decay_margin = math.inf if kappa_max == 0.0 else p.gamma_m/kappa_max
    coupling_margin = (math.inf if g_max == 0.0
                       else abs(complex(p.delta_c, -p.gamma_m/2.0))/g_max)

    return RegimeReport(decay_margin, coupling_margin,
                        decay_threshold, coupling_threshold)


def coupling_amplitudes(e: EffectiveParams) -> CouplingAmplitudes:
    half_gamma = e.gamma_diss/2.0
    forward = -1j*e.j_plus - half_gamma*cmath.exp(1j*e.phi)
    backward = -1j*e.j_minus - half_gamma*cmath.exp(-1j*e.phi)
    return CouplingAmplitudes(forward, backward)


def solve_nonreciprocal(e: EffectiveParams,
                        phi: float | None = None) -> NonreciprocalSolution:
    """solve_nonreciprocal: finds a real J (and phi when it is free) for
    which the backward amplitude vanishes, J = (G + i Gamma/2) exp(-i phi).

    Args:
        e (EffectiveParams): effective parameters, the stored j is ignored.
        phi (float | None, optional): pinned phase. Defaults to None, which
            lets the phase be solved for with J >= 0.

    Raises:
        ModelError: there is no dissipative coupling to balance.
        IncompatiblePhase: the pinned phase needs a complex J.

    Returns:
        NonreciprocalSolution: J, phi and the residual backward coupling.
    """
    if e.gamma_diss <= 0.0:
        raise ModelError('Nonreciprocity needs a dissipative coupling '
                         + f'gamma_diss > 0, got {e.gamma_diss}.')

    target = complex(e.g_coh, e.gamma_diss/2.0)

    if phi is None:
        phi = reduce_phase(math.atan2(target.imag, target.real))
        return NonreciprocalSolution(abs(target), phi, 0.0)

    phi = reduce_phase(phi)
    j_req = target*cmath.exp(-1j*phi)
    residual = abs(j_req.imag)
    if residual > NONRECIPROCAL_TOL:
        raise IncompatiblePhase(phi, residual)

    return NonreciprocalSolution(j_req.real, phi, residual)


def lock_nonreciprocal(e: EffectiveParams,
                       phi: float | None = None) -> EffectiveParams:
    sol = solve_nonreciprocal(e, phi)
    return e.with_coupling(j=sol.j, phi=sol.phi)


def is_nonreciprocal(e: EffectiveParams, tol: float = 1e-10) -> bool:
    return abs(coupling_amplitudes(e).backward) <= tol


def is_resonant(e: EffectiveParams, tol: float = 1e-10) -> bool:
    return abs(e.delta_a_p) <= tol and abs(e.delta_b_p) <= tol


def with_detuning(p: SystemParams, delta: float) -> SystemParams:
    """with_detuning: sets delta_b so that the shifted detunings differ by
    delta after reduction.
    """
    denom = p.delta_c**2 + (p.gamma_m/2.0)**2
    delta_a_p = p.delta_a - p.g_a**2*p.delta_c/denom
    return replace(p, delta_b=delta_a_p + delta + p.g_b**2*p.delta_c/denom)


def with_reservoir(p: SystemParams, gamma_m: float) -> SystemParams:
    """with_reservoir: changes the reservoir damping while rescaling g_a and
    g_b so the induced decays Gamma_a and Gamma_b stay fixed.
    """
    if gamma_m <= 0.0:
        raise ModelError(f'Reservoir damping must be > 0, got {gamma_m}.')

    e = reduce_to_effective(p)
    gamma = gamma_m/2.0
    scale = (p.delta_c**2 + gamma**2)/gamma
    return replace(p,
                   gamma_m=gamma_m,
                   g_a=math.sqrt(e.gamma_a_eff*scale),
                   g_b=math.sqrt(e.gamma_b_eff*scale))
