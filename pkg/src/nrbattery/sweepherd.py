'''
===============================================================================
Sweep Herd Class

Runs every point of a SweepSpec grid, sequentially or on a process pool, and
collects the records in row-major order.
===============================================================================
'''
import os
import math
import time
import logging
from dataclasses import replace
from multiprocessing.pool import Pool
import numpy as np

from nrbattery.sysparams import SystemParams, ParamsError
from nrbattery.model import (ModelError,
                             reduce_to_effective,
                             solve_nonreciprocal,
                             with_detuning)
from nrbattery.momentmodel import EffectiveModel, FullModel, UnstableSystem, efficiency
from nrbattery.integrator import integrate, StepSizeUnderflow
from nrbattery.analytic import (closed_form_moments,
                                in_closed_form_regime,
                                power_analytic,
                                steady_energies)
from nrbattery.spectrum import solve_ep, NoRealSolution, NonConvergence
from nrbattery.sweepspec import SweepSpec, SweepRecord, SCALAR_OUTPUTS


logger = logging.getLogger(__name__)

_TRANSIENT = ('E_A', 'E_B', 'eta', 'power')
_STEADY = ('E_A_inf', 'E_B_inf', 'eta_inf')


def apply_point(base: SystemParams, point: dict[str, float]) -> SystemParams:
    """apply_point: sets the swept values on the base parameters. Field axes
    are applied first so that 'r' and 'delta' see the final rates.

    Raises:
        ParamsError: the point gives invalid parameters.
    """
    fields_only = {kk: vv for kk, vv in point.items() if kk not in ('r', 'delta')}
    params = replace(base, **fields_only)
    if 'r' in point:
        params = replace(params, kappa_b=point['r']*params.kappa_a)
    if 'delta' in point:
        params = with_detuning(params, point['delta'])
    return params


def lock_coupling(params: SystemParams, spec: SweepSpec) -> SystemParams:
    """lock_coupling: re-solves J (and phi) on the effective parameters and
    writes them back to the system parameters.

    Raises:
        ModelError: no nonreciprocal solution.
        NoRealSolution, NonConvergence: no exceptional point.
    """
    if spec.nonreciprocal_lock:
        sol = solve_nonreciprocal(reduce_to_effective(params))
        return replace(params, j=sol.j, phi=sol.phi)

    if spec.ep_lock:
        sols = solve_ep(reduce_to_effective(params), ('j',))
        j_ep = min((ss.values['j'] for ss in sols), key=lambda jj: abs(jj - params.j))
        return replace(params, j=j_ep)

    return params


def _evaluate_model(kind: str, params: SystemParams,
                    spec: SweepSpec) -> tuple[dict[str, float], object]:
    values = dict({})
    traj = None
    wants_transient = any(oo in spec.outputs for oo in _TRANSIENT)
    wants_traj = 'trajectory' in spec.outputs
    t_end = spec.time.t_end

    if kind == 'effective':
        eff = reduce_to_effective(params)
        model = EffectiveModel(eff)
        closed = spec.use_closed_form and not wants_traj and in_closed_form_regime(eff)
    else:
        eff = None
        model = FullModel(params)
        closed = False

    if wants_transient and closed:
        mom = closed_form_moments(t_end, eff)
        e_a = eff.omega_a*float(mom.n_aa)
        e_b = eff.omega_b*float(mom.n_bb)
        values['E_A'] = e_a
        values['E_B'] = e_b
        values['eta'] = float(efficiency(e_a, e_b))
        values['power'] = float(power_analytic(t_end, eff))
    elif wants_transient or wants_traj:
        traj = integrate(model, t_end=t_end, samples=spec.time.samples,
                         config=spec.integrator)
        values['E_A'] = float(traj.energy_a[-1])
        values['E_B'] = float(traj.energy_b[-1])
        values['eta'] = float(traj.efficiency[-1])
        values['power'] = float(traj.power[-1])

    if any(oo in spec.outputs for oo in _STEADY):
        if eff is not None:
            steady = steady_energies(eff)
        else:
            steady = model.steady_state()
        values['E_A_inf'] = steady.energy_a
        values['E_B_inf'] = steady.energy_b
        values['eta_inf'] = steady.efficiency

    return ({kk: vv for kk, vv in values.items() if kk in spec.outputs}, traj)


def evaluate_point(spec: SweepSpec, index: int, point: dict[str, float]) -> SweepRecord:
    """evaluate_point: lock, integrate or evaluate in closed form, and
    extract the requested outputs at one grid point. Failures are recorded in
    the status and never raised.
    """
    record = SweepRecord(index, dict(point))
    kinds = ('effective', 'full') if spec.model == 'both' else (spec.model,)
    scalars = [oo for oo in spec.outputs if oo in SCALAR_OUTPUTS]

    def suffix(kind: str) -> str:
        return '_full' if spec.model == 'both' and kind == 'full' else ''

    def fail(status: str, err: Exception,
             failed: tuple[str, ...] = kinds) -> SweepRecord:
        record.status = status
        record.message = str(err)
        for kk in failed:
            for oo in scalars:
                record.values[oo + suffix(kk)] = math.nan
        return record

    try:
        params = apply_point(spec.base_params(), point)
    except ParamsError as err:
        return fail('invalid', err)

    try:
        params = lock_coupling(params, spec)
    except ModelError as err:
        return fail('nonreciprocal_infeasible', err)
    except (NoRealSolution, NonConvergence) as err:
        return fail('ep_infeasible', err)

    record.coupling = {'j': params.j, 'phi': params.phi}

    # A failing model only blanks its own columns
    for kk in kinds:
        try:
            (values, traj) = _evaluate_model(kk, params, spec)
        except (UnstableSystem, StepSizeUnderflow) as err:
            fail('unstable', err, (kk,))
            continue
        for oo, vv in values.items():
            record.values[oo + suffix(kk)] = vv
        if traj is not None and 'trajectory' in spec.outputs:
            record.trajectories[kk] = traj

    return record


class SweepHerd:
    """ Runs the points of a sweep specification and times the sweep. The
    records always come back in row-major grid order.
    """
    def __init__(self, spec: SweepSpec) -> None:
        self._spec = spec
        self._n_para = 1
        self._sweep_run_time = -1.0

    def set_num_para(self, n_para: int = 1) -> None:
        """set_num_para: number of worker processes for run_para, clamped to
        [1, cpu count].
        """
        n_para = int(n_para)
        n_cpus = os.cpu_count()

        if n_para <= 0:
            n_para = 1
        elif n_cpus is not None and n_para > n_cpus:
            n_para = n_cpus

        self._n_para = n_para

    def run_sequential(self) -> list[SweepRecord]:
        start_time = time.perf_counter()
        records = [evaluate_point(self._spec, ii, pp)
                   for ii, pp in enumerate(self._spec.grid())]
        self._end_sweep(start_time, records)
        return records

    def run_para(self) -> list[SweepRecord]:
        start_time = time.perf_counter()
        with Pool(self._n_para) as pool:
            processes = list([])
            for ii, pp in enumerate(self._spec.grid()):
                processes.append(pool.apply_async(evaluate_point,
                                                  args=(self._spec, ii, pp)))
            records = [pp.get() for pp in processes]

        self._end_sweep(start_time, records)
        return records

    def run(self) -> list[SweepRecord]:
        if self._n_para > 1:
            return self.run_para()
        return self.run_sequential()

    def _end_sweep(self, start_time: float, records: list[SweepRecord]) -> None:
        self._sweep_run_time = time.perf_counter() - start_time
        n_failed = sum(1 for rr in records if rr.status != 'ok')
        logger.info('Sweep of %d points finished in %.3f s, %d not ok',
                    len(records), self._sweep_run_time, n_failed)

    def get_sweep_time(self) -> float:
        return self._sweep_run_time


def run_sweep(spec: SweepSpec, n_para: int = 1) -> list[SweepRecord]:
    herd = SweepHerd(spec)
    herd.set_num_para(n_para)
    return herd.run()


def sweep_table(spec: SweepSpec,
                records: list[SweepRecord]) -> dict[str, list]:
    """sweep_table: column-oriented view of the records for CSV output, in
    the order axes, J, phi, outputs, status.
    """
    kinds = ('effective', 'full') if spec.model == 'both' else (spec.model,)
    out_names = list([])
    for kk in kinds:
        suffix = '_full' if spec.model == 'both' and kk == 'full' else ''
        out_names += [oo + suffix for oo in spec.outputs if oo in SCALAR_OUTPUTS]

    table: dict[str, list] = {aa.name: list([]) for aa in spec.axes}
    table['j'] = list([])
    table['phi'] = list([])
    for nn in out_names:
        table[nn] = list([])
    table['status'] = list([])

    for rr in records:
        for aa in spec.axes:
            table[aa.name].append(rr.point[aa.name])
        table['j'].append(rr.coupling.get('j', math.nan))
        table['phi'].append(rr.coupling.get('phi', math.nan))
        for nn in out_names:
            table[nn].append(rr.values.get(nn, math.nan))
        table['status'].append(rr.status)

    return table


def partial_failure(records: list[SweepRecord]) -> bool:
    return any(rr.status != 'ok' for rr in records)


def records_array(records: list[SweepRecord], name: str) -> np.ndarray:
    return np.array([rr.values.get(name, math.nan) for rr in records])
