'''
==============================================================================
EXAMPLE: Run a damping ratio sweep in sequential then parallel mode
==============================================================================
'''
from pathlib import Path
from pprint import pprint
from nrbattery import SweepSpec, Axis, SweepHerd
from nrbattery.sweepspec import TimeSpec
from nrbattery.sweepherd import sweep_table
from nrbattery.outputmanager import OutputManager


def main() -> None:
    """main: sequential and parallel herd runs of the same grid, written to
    dev/output/.
    """
    print("-"*80)
    print('EXAMPLE: Sweep Herd Setup & Run')
    print("-"*80)
    # Integrate every point so the parallel run has something to do
    spec = SweepSpec(axes=(Axis('r', 1e-2, 1e2, 9, 'log'),
                           Axis('delta', 0.0, 0.04, 4)),
                     time=TimeSpec(t_end=250.0, samples=1001),
                     outputs=('E_B', 'eta', 'E_B_inf'),
                     use_closed_form=False)

    print(f'Sweep points: {spec.n_points}')
    print('First grid points:')
    pprint(spec.grid()[:4])
    print()

    herd = SweepHerd(spec)

    print('Running sweep sequentially.')
    records_seq = herd.run_sequential()
    time_seq = herd.get_sweep_time()

    print('Running sweep in parallel.')
    herd.set_num_para(4)
    records_para = herd.run_para()
    time_para = herd.get_sweep_time()

    same = all(ss.values == pp.values for ss, pp in zip(records_seq, records_para))

    out = OutputManager(Path('dev/output'))
    path = out.write_table('dev_para_sweep.csv', sweep_table(spec, records_para))

    print()
    print("="*80)
    print(f'Run time (sequential) = {time_seq:.3f} seconds')
    print(f'Run time (parallel)   = {time_para:.3f} seconds')
    print(f'Identical records     = {same}')
    print(f'Table written to: {path}')
    print("="*80)
    print()


if __name__ == '__main__':
    main()
