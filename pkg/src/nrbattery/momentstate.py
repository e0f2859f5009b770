'''
===============================================================================
Moment State and Trajectory Classes

First and second moments of the bosonic modes and the time series produced by
integrating them.
===============================================================================
'''
from dataclasses import dataclass, field
from typing import Iterator, Self
import numpy as np


HERMITIAN_TOL = 1e-10


class MomentStateError(Exception):
    """MomentStateError: custom error class for moment states that violate
    hermiticity or positivity.
    """


class DimensionMismatch(MomentStateError):
    """DimensionMismatch: the moment state does not match the number of modes
    of the model it is used with.
    """


@dataclass(eq=False)
class MomentState:
    """ Gaussian-sufficient moment state. first[i] = <x_i> and
    second[i,j] = <x_i^dag x_j> for the mode list (a, b) or (a, b, c).
    """
    first: np.ndarray
    ''' Complex first moments with shape (n,).
    '''

    second: np.ndarray
    ''' Complex Hermitian second moments with shape (n,n).
    '''

    def __post_init__(self) -> None:
        self.first = np.asarray(self.first, dtype=np.complex128)
        self.second = np.asarray(self.second, dtype=np.complex128)

        n_modes = self.first.shape[0]
        if self.first.ndim != 1 or self.second.shape != (n_modes, n_modes):
            raise DimensionMismatch('First moments of shape '
                                    + f'{self.first.shape} do not match second '
                                    + f'moments of shape {self.second.shape}.')

    @property
    def n_modes(self) -> int:
        return self.first.shape[0]

    @classmethod
    def vacuum(cls, n_modes: int) -> Self:
        return cls(np.zeros(n_modes, dtype=np.complex128),
                   np.zeros((n_modes, n_modes), dtype=np.complex128))

    @classmethod
    def coherent(cls, amplitudes: np.ndarray | list[complex]) -> Self:
        """coherent: product of coherent states, second = conj(v) v^T."""
        first = np.asarray(amplitudes, dtype=np.complex128)
        return cls(first, np.outer(first.conj(), first))

    def check(self, tol: float = HERMITIAN_TOL) -> None:
        """check: raises if the second moments are not Hermitian or have a
        negative population.

        Raises:
            MomentStateError: invariant violated beyond tol.
        """
        scale = max(1.0, float(np.max(np.abs(self.second))))
        herm_err = float(np.max(np.abs(self.second - self.second.conj().T)))
        if herm_err > tol*scale:
            raise MomentStateError('Second moments are not Hermitian, '
                                   + f'deviation {herm_err:.3e}.')

        pops = self.second.diagonal().real
        if np.any(pops < -tol*scale):
            raise MomentStateError(f'Negative population in {pops}.')

    def factorization_error(self) -> float:
        """Max deviation of the second moments from the coherent-state
        product of the first moments."""
        return float(np.max(np.abs(self.second
                                   - np.outer(self.first.conj(), self.first))))


def pack_state(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    """pack_state: flattens first moments and the upper triangle of the
    second moments into one complex vector.
    """
    iu = np.triu_indices(first.shape[0])
    return np.concatenate((first, second[iu]))


def unpack_state(vec: np.ndarray, n_modes: int) -> tuple[np.ndarray, np.ndarray]:
    """unpack_state: inverse of pack_state, rebuilding a Hermitian second
    moment matrix with a real diagonal.
    """
    iu = np.triu_indices(n_modes)
    first = vec[:n_modes]
    upper = np.zeros((n_modes, n_modes), dtype=np.complex128)
    upper[iu] = vec[n_modes:]
    diag = upper.diagonal().real.copy()
    second = upper + upper.conj().T
    np.fill_diagonal(second, diag)
    return (first, second)


@dataclass(eq=False)
class Trajectory:
    """ Sampled solution of the moment equations with the derived energy
    observables.
    """
    times: np.ndarray
    ''' Strictly increasing sample times with shape (T,).
    '''

    first: np.ndarray
    ''' First moments with shape (T,n).
    '''

    second: np.ndarray
    ''' Second moments with shape (T,n,n).
    '''

    model: str = 'effective'
    ''' Name of the model that produced the samples.
    '''

    energy_a: np.ndarray | None = None
    energy_b: np.ndarray | None = None
    ''' Charger and battery energies, omega_j <x_j^dag x_j>.
    '''

    efficiency: np.ndarray | None = None
    ''' E_B/(E_A + E_B), 0 when both energies vanish.
    '''

    power: np.ndarray | None = None
    ''' Battery charging power dE_B/dt.
    '''

    meta: dict = field(default_factory=dict)

    @property
    def n_samples(self) -> int:
        return self.times.shape[0]

    @property
    def n_modes(self) -> int:
        return self.first.shape[1]

    def state(self, index: int) -> MomentState:
        return MomentState(self.first[index], self.second[index])

    def states(self) -> Iterator[MomentState]:
        for ii in range(self.n_samples):
            yield self.state(ii)

    def has_observables(self) -> bool:
        return self.energy_b is not None
