'''
===============================================================================
Command Line Interface

nrbattery reduce | simulate | analytic | steady | sweep | ep | figures | validate

Exit codes: 0 success, 1 fatal error, 2 sweep finished with failed points.
===============================================================================
'''
import sys
import json
import logging
import argparse
from dataclasses import dataclass
from pathlib import Path
import numpy as np

from nrbattery.sysparams import SystemParams, ParamsError, get_preset, preset_names
from nrbattery.model import (ModelError,
                             reduce_to_effective,
                             validate_adiabatic,
                             coupling_amplitudes)
from nrbattery.paramconfig import ParamConfig, ParamConfigError
from nrbattery.momentstate import Trajectory
from nrbattery.momentmodel import build_model, efficiency, UnstableSystem
from nrbattery.integrator import (integrate,
                                  output_grid,
                                  IntegratorConfig,
                                  StepSizeUnderflow)
from nrbattery.analytic import (closed_form_moments,
                                power_analytic,
                                steady_energies,
                                ConditionsNotMet,
                                NonpositiveRate)
from nrbattery.spectrum import (solve_ep,
                                spectral,
                                drift_matrix,
                                FREE_VARS,
                                NoRealSolution,
                                NonConvergence)
from nrbattery.sweepspec import (SweepSpec,
                                 Axis,
                                 TimeSpec,
                                 SweepSpecError,
                                 OUTPUTS)
from nrbattery.sweepherd import SweepHerd, sweep_table, partial_failure
from nrbattery.figures import build_figure, FIGURES
from nrbattery.outputmanager import OutputManager, OutputManagerError, format_value
from nrbattery.trajectoryio import trajectory_columns, write_trajectory_netcdf
from nrbattery.acceptance import run_acceptance, hard_checks_pass, format_report


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_PARTIAL = 2

LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR')
EP_COLUMNS = ('free_var', 'value', 'residual', 'overlap')


class CliError(Exception):
    """CliError: custom error class for command line usage errors.
    """


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):
        raise CliError(message)


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: SystemParams
    source: str
    ''' Preset name or config file path the parameters came from.
    '''
    out_dir: Path
    integrator: IntegratorConfig


def _common_parser() -> argparse.ArgumentParser:
    common = _ArgumentParser(add_help=False)
    source = common.add_mutually_exclusive_group()
    source.add_argument('--preset', choices=preset_names(),
                        help='named parameter set, baseline when no source is given')
    source.add_argument('--config', type=Path,
                        help='key = value parameter file')
    common.add_argument('--set', action='append', default=[], metavar='KEY=VALUE',
                        help='parameter override, repeatable')
    common.add_argument('--out-dir', type=Path, default=Path('nrbattery_out'))
    common.add_argument('--rtol', type=float, default=IntegratorConfig.rtol)
    common.add_argument('--atol', type=float, default=IntegratorConfig.atol)
    common.add_argument('--method', choices=('DOP853', 'RK45', 'RK4'),
                        default=IntegratorConfig.method)
    common.add_argument('--log-level', choices=LOG_LEVELS, default='WARNING')
    return common


def _time_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--t-end', type=float, default=TimeSpec.t_end)
    parser.add_argument('--samples', type=int, default=TimeSpec.samples)


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = _ArgumentParser(prog='nrbattery',
                             description='Driven nonreciprocal quantum battery simulator.')
    subs = parser.add_subparsers(dest='command', required=True,
                                 parser_class=_ArgumentParser)

    sub = subs.add_parser('reduce', parents=[common],
                          help='print the effective parameters')
    sub.add_argument('--json', action='store_true')

    sub = subs.add_parser('simulate', parents=[common],
                          help='integrate the moment equations')
    sub.add_argument('--model', choices=('effective', 'full', 'both'), default='effective')
    sub.add_argument('--netcdf', action='store_true',
                     help='also write a netCDF4 trajectory archive')
    _time_args(sub)

    sub = subs.add_parser('analytic', parents=[common],
                          help='closed form moments in the nonreciprocal resonant regime')
    _time_args(sub)

    sub = subs.add_parser('steady', parents=[common], help='long time energies')
    sub.add_argument('--model', choices=('effective', 'full'), default='effective')
    sub.add_argument('--json', action='store_true')

    sub = subs.add_parser('sweep', parents=[common], help='parameter grid sweep')
    sub.add_argument('--axis', action='append', default=[], metavar='NAME:MIN:MAX:COUNT[:log]')
    sub.add_argument('--outputs', default='E_B',
                     help=f'comma separated subset of {",".join(OUTPUTS)}')
    sub.add_argument('--model', choices=('effective', 'full', 'both'), default='effective')
    sub.add_argument('--lock', choices=('none', 'nonreciprocal', 'ep'), default='none')
    sub.add_argument('--n-para', type=int, default=1)
    sub.add_argument('--no-closed-form', action='store_true')
    _time_args(sub)

    sub = subs.add_parser('ep', parents=[common], help='exceptional point solver')
    sub.add_argument('--free', default='j',
                     help=f'one or two comma separated variables from {",".join(FREE_VARS)}')
    sub.add_argument('--span', default=None, metavar='MIN:MAX',
                     help='range of the second free variable to trace over')

    sub = subs.add_parser('figures', parents=[common], help='figure datasets')
    sub.add_argument('names', nargs='+', help=f'"all" or any of {", ".join(FIGURES)}')
    sub.add_argument('--model', choices=('effective', 'full'), default='effective')

    sub = subs.add_parser('validate', parents=[common], help='run the acceptance suite')
    sub.add_argument('--tolerance-scale', type=float, default=1.0)
    sub.add_argument('--checks', default=None,
                     help='comma separated subset of check names')

    return parser


def parse_axis(text: str) -> Axis:
    """parse_axis: 'name:min:max:count' with an optional ':log'.

    Raises:
        CliError: malformed axis.
    """
    parts = text.split(':')
    if len(parts) not in (4, 5) or (len(parts) == 5 and parts[4] != 'log'):
        raise CliError(f'Axis "{text}" must be NAME:MIN:MAX:COUNT[:log].')
    try:
        return Axis(parts[0], float(parts[1]), float(parts[2]), int(parts[3]),
                    'log' if len(parts) == 5 else 'linear')
    except ValueError as err:
        raise CliError(f'Axis "{text}" has a non numeric bound or count.') from err


def _parse_span(text: str) -> tuple[float, float]:
    parts = text.split(':')
    try:
        (lo, hi) = (float(parts[0]), float(parts[1]))
    except (ValueError, IndexError) as err:
        raise CliError(f'Span "{text}" must be MIN:MAX.') from err
    if len(parts) != 2 or not lo < hi:
        raise CliError(f'Span "{text}" must be MIN:MAX with MIN < MAX.')
    return (lo, hi)


def load_run_config(args: argparse.Namespace) -> RunConfig:
    """load_run_config: resolves the parameter source, applies overrides and
    builds the integrator options.

    Raises:
        ParamConfigError: bad config file or override.
        ValueError: bad integrator options.
    """
    if args.config is not None:
        config = ParamConfig().read_config(args.config)
        source = str(args.config)
    else:
        source = args.preset or 'baseline'
        config = ParamConfig(get_preset(source))

    params = config.update_vars(args.set).get_params()

    report = validate_adiabatic(params)
    if not report.ok:
        logger.warning('Adiabatic elimination margins below threshold: decay %.3g, '
                       + 'coupling %.3g (need >= %.3g and >= %.3g).',
                       report.decay_margin, report.coupling_margin,
                       report.decay_threshold, report.coupling_threshold)

    integrator = IntegratorConfig(method=args.method, rtol=args.rtol, atol=args.atol)
    return RunConfig(args.command, params, source, args.out_dir, integrator)


def _meta(run: RunConfig, **extra) -> dict:
    meta = {'command': run.command,
            'source': run.source,
            'params': run.params.to_dict(),
            'integrator': {'method': run.integrator.method,
                           'rtol': run.integrator.rtol,
                           'atol': run.integrator.atol}}
    meta.update(extra)
    return meta


def _print_pairs(pairs: dict) -> None:
    width = max(len(kk) for kk in pairs)
    for kk, vv in pairs.items():
        if isinstance(vv, float):
            vv = f'{vv:.17g}'
        print(f'{kk:<{width}} = {vv}')


def cmd_reduce(run: RunConfig, args: argparse.Namespace) -> int:
    eff = reduce_to_effective(run.params)
    report = validate_adiabatic(run.params)
    amps = coupling_amplitudes(eff)

    pairs = dict(eff.to_dict())
    pairs['j_plus'] = eff.j_plus
    pairs['j_minus'] = eff.j_minus
    pairs['forward'] = amps.forward
    pairs['backward'] = amps.backward
    pairs['decay_margin'] = report.decay_margin
    pairs['coupling_margin'] = report.coupling_margin
    pairs['adiabatic_ok'] = report.ok

    if args.json:
        out = {kk: ([vv.real, vv.imag] if isinstance(vv, complex) else vv)
               for kk, vv in pairs.items()}
        print(json.dumps(out, indent=4))
    else:
        _print_pairs(pairs)
    return EXIT_OK


def _write_trajectory(out: OutputManager, run: RunConfig, traj: Trajectory,
                      stem: str, netcdf: bool) -> None:
    out.write_table(f'{stem}.csv', trajectory_columns(traj))
    out.write_meta(stem, _meta(run, model=traj.model, samples=traj.n_samples))
    if netcdf:
        path = out.get_path(f'{stem}.nc')
        write_trajectory_netcdf(traj, path, (run.params.omega_a, run.params.omega_b))
        logger.info('Wrote %s', path)


def cmd_simulate(run: RunConfig, args: argparse.Namespace) -> int:
    out = OutputManager(run.out_dir)
    kinds = ('effective', 'full') if args.model == 'both' else (args.model,)

    trajs = dict({})
    for kk in kinds:
        trajs[kk] = integrate(build_model(kk, run.params), t_end=args.t_end,
                              samples=args.samples, config=run.integrator)
        _write_trajectory(out, run, trajs[kk], f'trajectory_{kk}', args.netcdf)

    if args.model == 'both':
        e_eff = trajs['effective'].energy_b
        scale = float(np.max(np.abs(e_eff)))
        dev = float(np.max(np.abs(trajs['full'].energy_b - e_eff)))
        rel_dev = dev/scale if scale > 0.0 else dev
        out.write_json('comparison.json', {'max_abs_dev_e_b': dev,
                                           'max_rel_dev_e_b': rel_dev})
        print(f'max relative deviation of E_B (full vs effective) = {rel_dev:.6g}')

    return EXIT_OK


def cmd_analytic(run: RunConfig, args: argparse.Namespace) -> int:
    eff = reduce_to_effective(run.params)
    times = output_grid(args.t_end, args.samples)
    mom = closed_form_moments(times, eff)

    e_a = eff.omega_a*mom.n_aa
    e_b = eff.omega_b*mom.n_bb
    columns = {'t': times,
               're_a': mom.amp_a.real, 'im_a': mom.amp_a.imag,
               're_b': mom.amp_b.real, 'im_b': mom.amp_b.imag,
               'n_aa': mom.n_aa, 'n_bb': mom.n_bb,
               're_n_ab': mom.n_ab.real, 'im_n_ab': mom.n_ab.imag,
               'e_a': e_a, 'e_b': e_b,
               'eta': efficiency(e_a, e_b),
               'power': power_analytic(times, eff)}

    out = OutputManager(run.out_dir)
    out.write_table('analytic.csv', columns)
    out.write_meta('analytic', _meta(run, effective=eff.to_dict()))
    return EXIT_OK


def cmd_steady(run: RunConfig, args: argparse.Namespace) -> int:
    if args.model == 'effective':
        steady = steady_energies(reduce_to_effective(run.params))
        result = {'E_A': steady.energy_a, 'E_B': steady.energy_b,
                  'eta': steady.efficiency, 'ratio': steady.ratio,
                  'branch': steady.branch}
    else:
        steady = build_model('full', run.params).steady_state()
        result = {'E_A': steady.energy_a, 'E_B': steady.energy_b,
                  'eta': steady.efficiency,
                  'ratio': (steady.energy_b/steady.energy_a
                            if steady.energy_a > 0.0 else float('nan')),
                  'branch': 'linear_solve'}

    out = OutputManager(run.out_dir)
    out.write_table('steady.csv', {kk: [vv] for kk, vv in result.items()})
    out.write_meta('steady', _meta(run, model=args.model))

    if args.json:
        print(json.dumps(result, indent=4))
    else:
        _print_pairs(result)
    return EXIT_OK


def cmd_sweep(run: RunConfig, args: argparse.Namespace) -> int:
    outputs = tuple(oo.strip() for oo in args.outputs.split(',') if oo.strip())
    spec = SweepSpec(base=run.params,
                     axes=tuple(parse_axis(aa) for aa in args.axis),
                     time=TimeSpec(args.t_end, args.samples),
                     outputs=outputs,
                     model=args.model,
                     nonreciprocal_lock=args.lock == 'nonreciprocal',
                     ep_lock=args.lock == 'ep',
                     integrator=run.integrator,
                     use_closed_form=not args.no_closed_form)

    herd = SweepHerd(spec)
    herd.set_num_para(args.n_para)
    logger.info('Starting sweep of %d points', spec.n_points)
    records = herd.run()

    out = OutputManager(run.out_dir)
    out.write_table('sweep.csv', sweep_table(spec, records))
    out.write_meta('sweep', _meta(run, spec=spec.to_dict(),
                                  sweep_time_s=herd.get_sweep_time()))
    for rr in records:
        for kk, traj in rr.trajectories.items():
            out.write_table(f'sweep_{rr.index:05d}_{kk}.csv', trajectory_columns(traj))

    if partial_failure(records):
        n_failed = sum(1 for rr in records if rr.status != 'ok')
        logger.warning('%d of %d sweep points failed, see the status column.',
                       n_failed, len(records))
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_ep(run: RunConfig, args: argparse.Namespace) -> int:
    free = tuple(ff.strip().lower() for ff in args.free.split(','))
    span = None if args.span is None else _parse_span(args.span)
    if span is not None and len(free) != 2:
        raise CliError('--span needs two free variables.')

    try:
        solutions = solve_ep(reduce_to_effective(run.params), free, span=span)
    except ValueError as err:
        raise CliError(str(err)) from err

    # One row per free variable per solution, grouped by the solution index
    columns = {cc: list([]) for cc in EP_COLUMNS + ('solution', 'lambda_re', 'lambda_im')}
    for ii, ss in enumerate(solutions):
        report = spectral(drift_matrix(ss.params))
        for nn in free:
            columns['free_var'].append(nn)
            columns['value'].append(ss.values[nn])
            columns['residual'].append(ss.residual)
            columns['overlap'].append(ss.overlap)
            columns['solution'].append(ii)
            columns['lambda_re'].append(report.lambda_plus.real)
            columns['lambda_im'].append(report.lambda_plus.imag)

    out = OutputManager(run.out_dir)
    out.write_table('ep.csv', columns)
    out.write_meta('ep', _meta(run, free=list(free), span=span))

    print(','.join(EP_COLUMNS))
    for row in zip(*(columns[cc] for cc in EP_COLUMNS)):
        print(','.join(format_value(vv) for vv in row))
    return EXIT_OK


def cmd_figures(run: RunConfig, args: argparse.Namespace) -> int:
    names = list(FIGURES) if args.names == ['all'] else args.names
    for nn in names:
        if nn not in FIGURES:
            raise CliError(f'Unknown figure "{nn}", expected "all" or any of {FIGURES}.')

    out = OutputManager(run.out_dir)
    for nn in names:
        data = build_figure(nn, args.model, run.integrator)
        out.write_table(f'{nn}.csv', data.columns)
        out.write_meta(nn, _meta(run, **data.meta))
    return EXIT_OK


def cmd_validate(run: RunConfig, args: argparse.Namespace) -> int:
    names = None
    if args.checks is not None:
        names = [cc.strip() for cc in args.checks.split(',')]
    try:
        results = run_acceptance(args.tolerance_scale, names)
    except ValueError as err:
        raise CliError(str(err)) from err

    print(format_report(results))
    return EXIT_OK if hard_checks_pass(results) else EXIT_FATAL


COMMANDS = {
    'reduce': cmd_reduce,
    'simulate': cmd_simulate,
    'analytic': cmd_analytic,
    'steady': cmd_steady,
    'sweep': cmd_sweep,
    'ep': cmd_ep,
    'figures': cmd_figures,
    'validate': cmd_validate,
}

FATAL_ERRORS = (CliError,
                ParamConfigError,
                ParamsError,
                ModelError,
                OutputManagerError,
                SweepSpecError,
                ConditionsNotMet,
                NonpositiveRate,
                NoRealSolution,
                NonConvergence,
                UnstableSystem,
                StepSizeUnderflow,
                ValueError)


def main(argv: list[str] | None = None) -> int:
    """main: runs one command and returns the exit code.
    """
    try:
        args = build_parser().parse_args(argv)
    except CliError as err:
        print(f'nrbattery: error: {err}', file=sys.stderr)
        return EXIT_FATAL
    except SystemExit as err:
        return EXIT_OK if err.code in (None, 0) else EXIT_FATAL

    logging.basicConfig(level=getattr(logging, args.log_level),
                        format='%(asctime)s [%(levelname)s] %(message)s')

    try:
        run = load_run_config(args)
        return COMMANDS[args.command](run, args)
    except FATAL_ERRORS as err:
        logger.error('%s: %s', type(err).__name__, err)
        return EXIT_FATAL


if __name__ == '__main__':
    sys.exit(main())
