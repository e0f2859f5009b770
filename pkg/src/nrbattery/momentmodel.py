'''
===============================================================================
Moment Model Abstract Base Class and Models

Linear moment equations dv/dt = W v + f for the first moments and
dN/dt = conj(W) N + N W^T + conj(f) v^T + conj(v) f^T for the second moments
N_ij = <x_i^dag x_j>.
===============================================================================
'''
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
import numpy as np

from nrbattery.sysparams import SystemParams, EffectiveParams
from nrbattery.momentstate import MomentState, DimensionMismatch
from nrbattery.model import coupling_amplitudes, reduce_to_effective


STABILITY_TOL = 1e-12


class UnstableSystem(Exception):
    """UnstableSystem: the drift matrix has an eigenvalue with non-negative
    real part so there is no steady state.
    """


@dataclass(frozen=True)
class SteadyState:
    """ Steady first moments and the energies they carry.
    """
    amplitudes: np.ndarray
    energy_a: float
    energy_b: float
    efficiency: float

    @property
    def amp_a(self) -> complex:
        return complex(self.amplitudes[0])

    @property
    def amp_b(self) -> complex:
        return complex(self.amplitudes[1])


def efficiency(energy_a: np.ndarray | float,
               energy_b: np.ndarray | float) -> np.ndarray:
    """efficiency: E_B/(E_A + E_B) with the ratio set to 0 where the total
    energy is below 1e-30.
    """
    e_a = np.asarray(energy_a, dtype=np.float64)
    e_b = np.asarray(energy_b, dtype=np.float64)
    total = e_a + e_b
    safe = np.where(total < 1e-30, 1.0, total)
    return np.where(total < 1e-30, 0.0, e_b/safe)


def moment_derivative(drift: np.ndarray,
                      drive: np.ndarray,
                      first: np.ndarray,
                      second: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d_first = drift @ first + drive
    d_second = (drift.conj() @ second + second @ drift.T
                + np.outer(drive.conj(), first) + np.outer(first.conj(), drive))
    return (d_first, d_second)


class MomentModel(ABC):
    """MomentModel: ABC for a driven linear bosonic model. A model provides
    its drift matrix, drive vector and mode frequencies, the moment equations
    and steady state follow from these.
    """
    name = 'model'

    @property
    @abstractmethod
    def n_modes(self) -> int:
        """n_modes"""

    @abstractmethod
    def drift(self) -> np.ndarray:
        """drift: complex (n,n) matrix W."""

    @abstractmethod
    def drive(self) -> np.ndarray:
        """drive: complex (n,) vector f."""

    @abstractmethod
    def frequencies(self) -> tuple[float, float]:
        """frequencies: (omega_a, omega_b) used for the energies."""

    def rhs(self, state: MomentState) -> MomentState:
        """rhs: time derivative of the moment state.

        Raises:
            DimensionMismatch: the state has the wrong number of modes.
        """
        if state.n_modes != self.n_modes:
            raise DimensionMismatch(f'{self.name} model has {self.n_modes} '
                                    + f'modes, state has {state.n_modes}.')
        (d_first, d_second) = moment_derivative(self.drift(), self.drive(),
                                                state.first, state.second)
        return MomentState(d_first, d_second)

    def steady_state(self) -> SteadyState:
        """steady_state: solves W v = -f for the steady first moments.

        Raises:
            UnstableSystem: an eigenvalue of W has real part >= -1e-12.
        """
        drift = self.drift()
        max_real = float(np.max(np.linalg.eigvals(drift).real))
        if max_real >= -STABILITY_TOL:
            raise UnstableSystem(f'No steady state for the {self.name} model, '
                                 + f'max eigenvalue real part {max_real:.3e}.')

        amps = np.linalg.solve(drift, -self.drive())
        (omega_a, omega_b) = self.frequencies()
        energy_a = omega_a*abs(amps[0])**2
        energy_b = omega_b*abs(amps[1])**2
        return SteadyState(amps, energy_a, energy_b,
                           float(efficiency(energy_a, energy_b)))


class EffectiveModel(MomentModel):
    """EffectiveModel: charger and battery with the reservoir eliminated.
    """
    name = 'effective'

    def __init__(self, params: EffectiveParams) -> None:
        self.params = params

    @property
    def n_modes(self) -> int:
        return 2

    def drift(self) -> np.ndarray:
        ee = self.params
        amps = coupling_amplitudes(ee)
        return np.array(
            [[complex(-ee.lambda_a/2.0, -ee.delta_a_p), amps.backward],
             [amps.forward, complex(-ee.lambda_b/2.0, -ee.delta_b_p)]],
            dtype=np.complex128)

    def drive(self) -> np.ndarray:
        return np.array([-1j*self.params.epsilon, 0.0], dtype=np.complex128)

    def frequencies(self) -> tuple[float, float]:
        return (self.params.omega_a, self.params.omega_b)


class FullModel(MomentModel):
    """FullModel: charger, battery and reservoir mode c. The reservoir
    couples with amplitude g_j/sqrt(2), so eliminating c at delta_c = 0
    gives the induced rates Gamma_a, Gamma_b and Gamma of the effective model.
    """
    name = 'full'

    def __init__(self, params: SystemParams) -> None:
        self.params = params

    @property
    def n_modes(self) -> int:
        return 3

    def drift(self) -> np.ndarray:
        pp = self.params
        h_a = pp.g_a/math.sqrt(2.0)
        h_b = pp.g_b/math.sqrt(2.0)
        phase = complex(math.cos(pp.phi), math.sin(pp.phi))
        return np.array(
            [[complex(-pp.kappa_a/2.0, -pp.delta_a), -1j*pp.j, -1j*h_a*phase.conjugate()],
             [-1j*pp.j, complex(-pp.kappa_b/2.0, -pp.delta_b), -1j*h_b],
             [-1j*h_a*phase, -1j*h_b, complex(-pp.gamma_m/2.0, -pp.delta_c)]],
            dtype=np.complex128)

    def drive(self) -> np.ndarray:
        return np.array([-1j*self.params.epsilon, 0.0, 0.0], dtype=np.complex128)

    def frequencies(self) -> tuple[float, float]:
        return (self.params.omega_a, self.params.omega_b)


def build_model(kind: str, params: SystemParams | EffectiveParams) -> MomentModel:
    """build_model: selects the model for an integration.

    Args:
        kind (str): 'effective' or 'full'.
        params (SystemParams | EffectiveParams): the effective model accepts
            both and reduces system parameters, the full model needs system
            parameters.

    Raises:
        ValueError: unknown kind or parameters that cannot build the model.
    """
    if kind == 'effective':
        if isinstance(params, SystemParams):
            params = reduce_to_effective(params)
        return EffectiveModel(params)

    if kind == 'full':
        if not isinstance(params, SystemParams):
            raise ValueError('The full model needs SystemParams, the reservoir '
                             + 'cannot be rebuilt from EffectiveParams.')
        return FullModel(params)

    raise ValueError(f'Unknown model "{kind}", expected "effective" or "full".')


def effective_rhs(state: MomentState, e: EffectiveParams) -> MomentState:
    return EffectiveModel(e).rhs(state)


def full_rhs(state: MomentState, p: SystemParams) -> MomentState:
    return FullModel(p).rhs(state)


def steady_state(e: EffectiveParams) -> SteadyState:
    return EffectiveModel(e).steady_state()
