'''
===============================================================================
Figure Datasets

Tables behind the detuning, damping ratio and exceptional point studies of
the driven nonreciprocal battery. Time series are in long format, one row per
(curve, time) pair.
===============================================================================
'''
import math
import logging
from dataclasses import dataclass, field, replace
import numpy as np

from nrbattery.sysparams import SystemParams, baseline
from nrbattery.model import reduce_to_effective, with_detuning
from nrbattery.momentstate import Trajectory
from nrbattery.momentmodel import build_model, efficiency
from nrbattery.integrator import integrate, IntegratorConfig
from nrbattery.analytic import closed_form_moments, power_analytic
from nrbattery.sweepspec import SweepSpec, Axis, TimeSpec
from nrbattery.sweepherd import run_sweep, apply_point, records_array


logger = logging.getLogger(__name__)

SAMPLES = 2001
FIG2_DETUNINGS = (0.0, 0.01, 0.1)
FIG2_PHASES = (math.pi/2, math.pi/3, math.pi/4)
FIG3_POWER_RATIOS = (0.1, 1.0, 10.0)

FIGURES = ('fig2a', 'fig2b', 'fig2c', 'fig2d',
           'fig3a', 'fig3b', 'fig3c', 'fig3d', 'fig3e', 'fig3f',
           'fig4a', 'fig4b')


@dataclass(eq=False)
class Dataset:
    name: str
    columns: dict[str, np.ndarray]
    meta: dict = field(default_factory=dict)

    @property
    def n_rows(self) -> int:
        return len(next(iter(self.columns.values())))


def _meta(params: SystemParams, **notes) -> dict:
    out = {'params': params.to_dict(),
           'effective': reduce_to_effective(params).to_dict()}
    out.update(notes)
    return out


def _trajectory(params: SystemParams, model: str, t_end: float,
                config: IntegratorConfig | None = None) -> Trajectory:
    return integrate(build_model(model, params), t_end=t_end,
                     samples=SAMPLES, config=config)


def _long_table(curve_name: str,
                curves: list[tuple[float, np.ndarray, np.ndarray]],
                value_name: str,
                coupling: float) -> dict[str, np.ndarray]:
    return {curve_name: np.concatenate([np.full(tt.shape, cc) for cc, tt, _ in curves]),
            't': np.concatenate([tt for _, tt, _ in curves]),
            'jt': np.concatenate([coupling*tt for _, tt, _ in curves]),
            value_name: np.concatenate([vv for _, _, vv in curves])}


def figure2(variant: str, model: str = 'effective',
            config: IntegratorConfig | None = None) -> Dataset:
    """figure2: time series at the baseline. (a) E_B and (b) efficiency for
    three detunings over Jt in [0, 20], (c) E_B for three phases at fixed
    J = Gamma/2, (d) power for three detunings over Jt in [0, 5].
    """
    base = baseline()
    coupling = base.j

    if variant in ('a', 'b', 'd'):
        jt_end = 5.0 if variant == 'd' else 20.0
        curves = list([])
        for delta in FIG2_DETUNINGS:
            traj = _trajectory(with_detuning(base, delta), model,
                               jt_end/coupling, config)
            value = {'a': traj.energy_b, 'b': traj.efficiency, 'd': traj.power}[variant]
            curves.append((delta, traj.times, value))
        value_name = {'a': 'e_b', 'b': 'eta', 'd': 'power'}[variant]
        columns = _long_table('delta', curves, value_name, coupling)
        return Dataset(f'fig2{variant}', columns,
                       _meta(base, model=model, detunings=list(FIG2_DETUNINGS)))

    if variant == 'c':
        curves = list([])
        for phi in FIG2_PHASES:
            traj = _trajectory(replace(base, phi=phi), model, 20.0/coupling, config)
            curves.append((phi, traj.times, traj.energy_b))
        columns = _long_table('phi', curves, 'e_b', coupling)
        return Dataset('fig2c', columns,
                       _meta(base, model=model, phases=list(FIG2_PHASES),
                             note='phase values are representative choices'))

    raise ValueError(f'Unknown variant "{variant}" for figure 2, expected a to d.')


def _ratio_series(ratios: np.ndarray, jt_end: float, value_name: str,
                  model: str, config: IntegratorConfig | None) -> dict[str, np.ndarray]:
    base = baseline()
    coupling = base.j
    times = np.linspace(0.0, jt_end/coupling, SAMPLES)

    curves = list([])
    for rr in ratios:
        params = apply_point(base, {'r': float(rr)})
        if model == 'effective':
            eff = reduce_to_effective(params)
            mom = closed_form_moments(times, eff)
            e_a = eff.omega_a*mom.n_aa
            e_b = eff.omega_b*mom.n_bb
            values = {'e_b': e_b,
                      'eta': efficiency(e_a, e_b),
                      'power': power_analytic(times, eff)}[value_name]
        else:
            traj = _trajectory(params, model, jt_end/coupling, config)
            values = {'e_b': traj.energy_b, 'eta': traj.efficiency,
                      'power': traj.power}[value_name]
        curves.append((float(rr), times, values))

    return _long_table('r', curves, value_name, coupling)


def figure3(variant: str, model: str = 'effective',
            config: IntegratorConfig | None = None) -> Dataset:
    """figure3: damping ratio r = kappa_b/kappa_a at kappa_a = 0.003. (a) E_B
    and (b) efficiency over (r, Jt), (c) steady E_B and (d) steady efficiency
    against r, (e) power over (r, Jt), (f) power for three ratios.
    """
    base = baseline()
    map_ratios = np.geomspace(1e-2, 1e2, 21)

    if variant in ('a', 'b', 'e'):
        jt_end = 5.0 if variant == 'e' else 10.0
        value_name = {'a': 'e_b', 'b': 'eta', 'e': 'power'}[variant]
        columns = _ratio_series(map_ratios, jt_end, value_name, model, config)
        return Dataset(f'fig3{variant}', columns, _meta(base, model=model))

    if variant == 'f':
        columns = _ratio_series(np.array(FIG3_POWER_RATIOS), 5.0, 'power', model, config)
        return Dataset('fig3f', columns, _meta(base, model=model))

    if variant in ('c', 'd'):
        out_name = 'E_B_inf' if variant == 'c' else 'eta_inf'
        spec = SweepSpec(base=base,
                         axes=(Axis('r', 1e-2, 1e3, 101, 'log'),),
                         outputs=(out_name,),
                         model=model)
        records = run_sweep(spec)
        columns = {'r': np.array([rr.point['r'] for rr in records]),
                   out_name.lower(): records_array(records, out_name)}
        return Dataset(f'fig3{variant}', columns, _meta(base, model=model))

    raise ValueError(f'Unknown variant "{variant}" for figure 3, expected a to f.')


def figure4(variant: str, model: str = 'effective') -> Dataset:
    """figure4: steady E_B with J locked to nonreciprocity against J locked to
    the exceptional point, (a) against r at zero detuning, (b) against the
    detuning at r = 1. Points without a real exceptional point are marked
    infeasible.
    """
    base = baseline()
    if variant == 'a':
        axis = Axis('r', 0.1, 10.0, 41, 'log')
    elif variant == 'b':
        axis = Axis('delta', -0.04, 0.04, 41)
    else:
        raise ValueError(f'Unknown variant "{variant}" for figure 4, expected a or b.')

    common = {'base': base, 'axes': (axis,), 'outputs': ('E_B_inf',),
              'model': model, 'time': TimeSpec()}
    nonrec = run_sweep(SweepSpec(nonreciprocal_lock=True, **common))
    ep = run_sweep(SweepSpec(ep_lock=True, **common))

    e_nor = records_array(nonrec, 'E_B_inf')
    e_ep = records_array(ep, 'E_B_inf')
    columns = {axis.name: np.array([rr.point[axis.name] for rr in nonrec]),
               'j_nor': np.array([rr.coupling.get('j', math.nan) for rr in nonrec]),
               'e_b_nor': e_nor,
               'j_ep': np.array([rr.coupling.get('j', math.nan) for rr in ep]),
               'e_b_ep': e_ep,
               'diff': e_ep - e_nor,
               'ep_feasible': np.array([int(rr.status == 'ok') for rr in ep])}
    return Dataset(f'fig4{variant}', columns, _meta(base, model=model))


def build_figure(name: str, model: str = 'effective',
                 config: IntegratorConfig | None = None) -> Dataset:
    """build_figure: dataset for a name such as 'fig2a' or 'fig4b'.

    Raises:
        ValueError: unknown figure name.
    """
    if name not in FIGURES:
        raise ValueError(f'Unknown figure "{name}", expected one of {FIGURES}.')

    logger.info('Building %s with the %s model', name, model)
    variant = name[-1]
    if name.startswith('fig2'):
        return figure2(variant, model, config)
    if name.startswith('fig3'):
        return figure3(variant, model, config)
    return figure4(variant, model)
