'''
===============================================================================
System and Effective Parameter Classes

Frozen parameter sets for the three-mode charger/battery/reservoir system and
for the two-mode effective model obtained by eliminating the reservoir.
===============================================================================
'''
import math
from dataclasses import dataclass, fields, replace, asdict
from typing import Any, Callable, Self


class ParamsError(Exception):
    """ParamsError: custom error class for invalid physical parameters.
    """


def reduce_phase(phi: float) -> float:
    """reduce_phase: maps a phase into [0, 2pi)."""
    phi = math.fmod(phi, 2.0*math.pi)
    if phi < 0.0:
        phi += 2.0*math.pi
    if phi >= 2.0*math.pi:
        phi = 0.0
    return phi


def _check_finite(obj: Any) -> None:
    for ff in fields(obj):
        val = getattr(obj, ff.name)
        if not math.isfinite(val):
            raise ParamsError(f'Parameter {ff.name} must be finite, got {val}.')


def _check_nonnegative(obj: Any, names: tuple[str, ...]) -> None:
    for nn in names:
        if getattr(obj, nn) < 0.0:
            raise ParamsError(f'Parameter {nn} must be >= 0, got {getattr(obj, nn)}.')


@dataclass(frozen=True)
class SystemParams:
    """ Physical parameters of the driven charger (a), battery (b) and
    dissipative reservoir (c) modes. All rates share one frequency unit, the
    mode energies are given in units of hbar.
    """
    delta_a: float = 0.0
    ''' Detuning of the charger from the drive.
    '''

    delta_b: float = 0.0
    ''' Detuning of the battery from the drive.
    '''

    delta_c: float = 0.0
    ''' Detuning of the reservoir mode from the drive.
    '''

    g_a: float = 0.0
    ''' Charger-reservoir coupling, must be >= 0.
    '''

    g_b: float = 0.0
    ''' Battery-reservoir coupling, must be >= 0.
    '''

    j: float = 0.0
    ''' Direct coherent charger-battery coupling.
    '''

    phi: float = 0.0
    ''' Synthetic phase of the reservoir loop, reduced into [0, 2pi).
    '''

    epsilon: float = 0.0
    ''' Drive amplitude on the charger.
    '''

    kappa_a: float = 0.0
    kappa_b: float = 0.0
    ''' Intrinsic energy damping rates of charger and battery, >= 0.
    '''

    gamma_m: float = 1.0
    ''' Reservoir energy damping rate, must be > 0.
    '''

    omega_a: float = 1.0
    omega_b: float = 1.0
    ''' Mode frequencies used to convert populations into energies.
    '''

    def __post_init__(self) -> None:
        _check_finite(self)
        _check_nonnegative(self, ('g_a', 'g_b', 'kappa_a', 'kappa_b', 'epsilon'))
        if self.gamma_m <= 0.0:
            raise ParamsError(f'Parameter gamma_m must be > 0, got {self.gamma_m}.')

        object.__setattr__(self, 'phi', reduce_phase(self.phi))

    def to_dict(self) -> dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class EffectiveParams:
    """ Parameters of the two-mode effective model. The nonreciprocal
    couplings and total decay rates are derived from the stored fields so
    that they always stay consistent with them.
    """
    delta_a_p: float = 0.0
    ''' Shifted charger detuning.
    '''

    delta_b_p: float = 0.0
    ''' Shifted battery detuning.
    '''

    gamma_a_eff: float = 0.0
    gamma_b_eff: float = 0.0
    ''' Reservoir-induced local decay rates.
    '''

    g_coh: float = 0.0
    ''' Reservoir-induced coherent coupling G.
    '''

    gamma_diss: float = 0.0
    ''' Reservoir-induced dissipative coupling Gamma.
    '''

    j: float = 0.0
    phi: float = 0.0
    epsilon: float = 0.0
    kappa_a: float = 0.0
    kappa_b: float = 0.0
    omega_a: float = 1.0
    omega_b: float = 1.0

    def __post_init__(self) -> None:
        _check_finite(self)
        _check_nonnegative(self, ('gamma_a_eff', 'gamma_b_eff', 'gamma_diss',
                                  'kappa_a', 'kappa_b', 'epsilon'))

        object.__setattr__(self, 'phi', reduce_phase(self.phi))

    @property
    def j_plus(self) -> complex:
        """Coherent part of the a -> b coupling, J - G exp(i phi)."""
        return self.j - self.g_coh*complex(math.cos(self.phi), math.sin(self.phi))

    @property
    def j_minus(self) -> complex:
        """Coherent part of the b -> a coupling, J - G exp(-i phi)."""
        return self.j - self.g_coh*complex(math.cos(self.phi), -math.sin(self.phi))

    @property
    def lambda_a(self) -> float:
        return self.kappa_a + self.gamma_a_eff

    @property
    def lambda_b(self) -> float:
        return self.kappa_b + self.gamma_b_eff

    @property
    def detuning(self) -> float:
        """Relative detuning between battery and charger."""
        return self.delta_b_p - self.delta_a_p

    def with_coupling(self, j: float | None = None,
                      phi: float | None = None) -> Self:
        return replace(self,
                       j=self.j if j is None else j,
                       phi=self.phi if phi is None else phi)

    def with_detuning(self, delta: float) -> Self:
        """with_detuning: copy with the battery detuning set so that
        delta_b_p - delta_a_p = delta.
        """
        return replace(self, delta_b_p=self.delta_a_p + delta)

    def with_damping_ratio(self, ratio: float) -> Self:
        """with_damping_ratio: copy with kappa_b = ratio*kappa_a.

        Raises:
            ParamsError: the ratio is negative or kappa_a is zero.
        """
        if ratio < 0.0:
            raise ParamsError(f'Damping ratio must be >= 0, got {ratio}.')
        if self.kappa_a <= 0.0:
            raise ParamsError('Damping ratio is undefined for kappa_a = 0.')
        return replace(self, kappa_b=ratio*self.kappa_a)

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        out['j_plus'] = [self.j_plus.real, self.j_plus.imag]
        out['j_minus'] = [self.j_minus.real, self.j_minus.imag]
        out['lambda_a'] = self.lambda_a
        out['lambda_b'] = self.lambda_b
        return out


def baseline() -> SystemParams:
    """baseline: resonant reference system. The reservoir gives
    Gamma_a = Gamma_b = Gamma = 0.04 and J = Gamma/2 with phi = pi/2 makes the
    effective coupling nonreciprocal.

    Returns:
        SystemParams: baseline parameter set.
    """
    return SystemParams(g_a=math.sqrt(0.4),
                        g_b=math.sqrt(0.4),
                        j=0.02,
                        phi=math.pi/2,
                        epsilon=0.1,
                        kappa_a=0.003,
                        kappa_b=0.003,
                        gamma_m=20.0)


def superconducting(freq_unit_mhz: float = 1.0,
                    epsilon_mhz: float = 0.01) -> SystemParams:
    """superconducting: circuit platform numbers with rates quoted as
    rate/2pi in MHz, expressed in a frequency unit of freq_unit_mhz MHz.

    Args:
        freq_unit_mhz (float, optional): frequency unit in MHz. Defaults to 1.
        epsilon_mhz (float, optional): drive amplitude in MHz. Defaults to 0.01.

    Raises:
        ParamsError: the frequency unit is not positive.

    Returns:
        SystemParams: platform parameter set.
    """
    if freq_unit_mhz <= 0.0:
        raise ParamsError(f'Frequency unit must be > 0, got {freq_unit_mhz}.')

    scale = 1.0/freq_unit_mhz
    return SystemParams(g_a=0.33*scale,
                        g_b=0.33*scale,
                        j=0.01*scale,
                        phi=math.pi/2,
                        epsilon=epsilon_mhz*scale,
                        kappa_a=0.08*scale,
                        kappa_b=0.06*scale,
                        gamma_m=5.0*scale)


_PRESETS: dict[str, Callable[..., SystemParams]] = {
    'baseline': baseline,
    'superconducting': superconducting,
}


def preset_names() -> list[str]:
    return sorted(_PRESETS.keys())


def get_preset(name: str, **kwargs: float) -> SystemParams:
    """get_preset: builds a named parameter preset.

    Raises:
        ParamsError: no preset with this name.
    """
    if name not in _PRESETS:
        raise ParamsError(f'Unknown preset "{name}", expected one of {preset_names()}.')
    return _PRESETS[name](**kwargs)
