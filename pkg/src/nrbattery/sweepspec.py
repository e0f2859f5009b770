'''
===============================================================================
Sweep Specification Classes

Declarative description of a parameter grid, the time window and which
outputs to record at every grid point.
===============================================================================
'''
import math
import itertools
from dataclasses import dataclass, field, fields, asdict
import numpy as np

from nrbattery.sysparams import SystemParams, get_preset
from nrbattery.momentstate import Trajectory
from nrbattery.integrator import IntegratorConfig


SCALAR_OUTPUTS = ('E_A', 'E_B', 'eta', 'power', 'E_A_inf', 'E_B_inf', 'eta_inf')
OUTPUTS = SCALAR_OUTPUTS + ('trajectory',)
MODELS = ('effective', 'full', 'both')
DERIVED_AXES = ('r', 'delta')
STATUSES = ('ok', 'ep_infeasible', 'nonreciprocal_infeasible', 'unstable', 'invalid')


class SweepSpecError(Exception):
    """SweepSpecError: custom error class for invalid sweep specifications.
    """


def axis_names() -> tuple[str, ...]:
    return tuple(ff.name for ff in fields(SystemParams)) + DERIVED_AXES


@dataclass(frozen=True)
class Axis:
    """ One swept variable. Any SystemParams field, 'r' for kappa_b/kappa_a
    or 'delta' for the shifted detuning difference.
    """
    name: str
    min: float
    max: float
    count: int
    spacing: str = 'linear'

    def __post_init__(self) -> None:
        if self.name not in axis_names():
            raise SweepSpecError(f'Unknown sweep axis "{self.name}".')
        if self.count < 2:
            raise SweepSpecError(f'Axis {self.name} needs count >= 2, got {self.count}.')
        if not self.min < self.max:
            raise SweepSpecError(f'Axis {self.name} needs min < max, got '
                                 + f'[{self.min}, {self.max}].')
        if self.spacing not in ('linear', 'log'):
            raise SweepSpecError(f'Axis spacing must be linear or log, got {self.spacing}.')
        if self.spacing == 'log' and self.min <= 0.0:
            raise SweepSpecError(f'Log axis {self.name} needs min > 0.')

    def values(self) -> np.ndarray:
        if self.spacing == 'log':
            return np.geomspace(self.min, self.max, self.count)
        return np.linspace(self.min, self.max, self.count)


@dataclass(frozen=True)
class TimeSpec:
    t_end: float = 200.0
    samples: int = 2001

    def __post_init__(self) -> None:
        if self.t_end <= 0.0 or self.samples < 2:
            raise SweepSpecError('Time window needs t_end > 0 and samples >= 2.')


@dataclass(frozen=True)
class SweepSpec:
    """ Grid sweep over up to two axes. Locks re-solve J (and phi) at every
    point: nonreciprocal_lock cancels the backward coupling, ep_lock places
    the drift matrix at its exceptional point.
    """
    base: SystemParams | str = 'baseline'
    axes: tuple[Axis, ...] = ()
    time: TimeSpec = field(default_factory=TimeSpec)
    outputs: tuple[str, ...] = ('E_B',)
    model: str = 'effective'
    nonreciprocal_lock: bool = False
    ep_lock: bool = False
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    use_closed_form: bool = True
    ''' Evaluate E_A, E_B, eta and power at t_end in closed form where the
    nonreciprocal resonant regime holds and no trajectory is requested.
    '''

    def __post_init__(self) -> None:
        if len(self.axes) > 2:
            raise SweepSpecError(f'At most 2 sweep axes, got {len(self.axes)}.')
        if len({aa.name for aa in self.axes}) != len(self.axes):
            raise SweepSpecError('Sweep axes must be distinct.')
        if not self.outputs:
            raise SweepSpecError('At least one output is needed.')
        for oo in self.outputs:
            if oo not in OUTPUTS:
                raise SweepSpecError(f'Unknown output "{oo}", expected a subset of {OUTPUTS}.')
        if self.model not in MODELS:
            raise SweepSpecError(f'Unknown model "{self.model}", expected one of {MODELS}.')
        if self.nonreciprocal_lock and self.ep_lock:
            raise SweepSpecError('nonreciprocal_lock and ep_lock are mutually exclusive.')

    def base_params(self) -> SystemParams:
        if isinstance(self.base, SystemParams):
            return self.base
        return get_preset(self.base)

    def grid(self) -> list[dict[str, float]]:
        """grid: row-major list of axis values, the last axis varies fastest.
        A sweep without axes has one point."""
        names = [aa.name for aa in self.axes]
        values = [aa.values() for aa in self.axes]
        return [dict(zip(names, (float(vv) for vv in combo)))
                for combo in itertools.product(*values)]

    @property
    def n_points(self) -> int:
        return math.prod(aa.count for aa in self.axes)

    def to_dict(self) -> dict:
        out = asdict(self)
        out['base'] = self.base_params().to_dict()
        out['base_name'] = self.base if isinstance(self.base, str) else None
        return out


@dataclass(eq=False)
class SweepRecord:
    """ Result of one grid point. Scalar outputs are finite when the status is
    ok. A failed model has nan in its own columns only.
    """
    index: int
    point: dict[str, float]
    values: dict[str, float] = field(default_factory=dict)
    status: str = 'ok'
    coupling: dict[str, float] = field(default_factory=dict)
    ''' J and phi used at this point after any lock.
    '''
    trajectories: dict[str, Trajectory] = field(default_factory=dict)
    message: str = ''
