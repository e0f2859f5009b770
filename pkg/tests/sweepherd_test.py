'''
==============================================================================
TEST: Sweep specification and SweepHerd
==============================================================================
'''
import os
import math
import pytest
from nrbattery.sysparams import baseline
from nrbattery.integrator import IntegratorConfig
from nrbattery.sweepspec import Axis, TimeSpec, SweepSpec, SweepSpecError
from nrbattery.sweepherd import (SweepHerd,
                                 apply_point,
                                 evaluate_point,
                                 partial_failure,
                                 records_array,
                                 run_sweep,
                                 sweep_table)
import tests.batterychecker as bc


@pytest.fixture()
def ratio_spec() -> SweepSpec:
    return SweepSpec(axes=(Axis('r', 1.0, 10.0, 4),),
                     outputs=('E_B_inf', 'eta_inf'))


@pytest.mark.parametrize(
    ('kwargs', 'expected'),
    (
        ({'name': 'kappa_c', 'min': 0.0, 'max': 1.0, 'count': 3},
         'Unknown sweep axis "kappa_c".'),
        ({'name': 'j', 'min': 0.0, 'max': 1.0, 'count': 1},
         'Axis j needs count >= 2, got 1.'),
        ({'name': 'j', 'min': 1.0, 'max': 1.0, 'count': 3},
         'Axis j needs min < max, got [1.0, 1.0].'),
        ({'name': 'j', 'min': 0.0, 'max': 1.0, 'count': 3, 'spacing': 'log'},
         'Log axis j needs min > 0.'),
    )
)
def test_axis_err(kwargs: dict, expected: str) -> None:
    with pytest.raises(SweepSpecError) as err_info:
        Axis(**kwargs)

    (msg,) = err_info.value.args
    assert msg == expected


def test_axis_values() -> None:
    assert list(Axis('r', 1.0, 100.0, 3, 'log').values()) == pytest.approx([1.0, 10.0, 100.0])
    assert list(Axis('j', 0.0, 0.04, 3).values()) == pytest.approx([0.0, 0.02, 0.04])


def test_time_spec_err() -> None:
    with pytest.raises(SweepSpecError):
        TimeSpec(t_end=0.0)


@pytest.mark.parametrize(
    ('kwargs', 'expected'),
    (
        ({'axes': (Axis('j', 0.0, 1.0, 2), Axis('r', 1.0, 2.0, 2),
                   Axis('phi', 0.0, 1.0, 2))},
         'At most 2 sweep axes, got 3.'),
        ({'axes': (Axis('j', 0.0, 1.0, 2), Axis('j', 0.0, 2.0, 2))},
         'Sweep axes must be distinct.'),
        ({'outputs': ()}, 'At least one output is needed.'),
        ({'model': 'hybrid'},
         "Unknown model \"hybrid\", expected one of ('effective', 'full', 'both')."),
        ({'nonreciprocal_lock': True, 'ep_lock': True},
         'nonreciprocal_lock and ep_lock are mutually exclusive.'),
    )
)
def test_sweep_spec_err(kwargs: dict, expected: str) -> None:
    with pytest.raises(SweepSpecError) as err_info:
        SweepSpec(**kwargs)

    (msg,) = err_info.value.args
    assert msg == expected


def test_sweep_spec_unknown_output() -> None:
    with pytest.raises(SweepSpecError) as err_info:
        SweepSpec(outputs=('E_C',))

    (msg,) = err_info.value.args
    assert msg.startswith('Unknown output "E_C"')


def test_grid_row_major() -> None:
    spec = SweepSpec(axes=(Axis('j', 0.0, 0.04, 3), Axis('r', 1.0, 2.0, 2)))
    grid = spec.grid()
    assert spec.n_points == 6
    assert len(grid) == 6
    assert [pp['r'] for pp in grid] == pytest.approx([1.0, 2.0]*3)
    assert [pp['j'] for pp in grid] == pytest.approx([0.0, 0.0, 0.02, 0.02, 0.04, 0.04])


def test_grid_without_axes() -> None:
    spec = SweepSpec()
    assert spec.n_points == 1
    assert spec.grid() == [{}]
    assert spec.base_params() == baseline()


def test_apply_point() -> None:
    params = apply_point(baseline(), {'kappa_a': 0.01, 'r': 2.0, 'delta': 0.01})
    assert params.kappa_a == 0.01
    assert params.kappa_b == pytest.approx(0.02)
    assert params.delta_b == pytest.approx(0.01)


def test_evaluate_point_steady(ratio_spec: SweepSpec) -> None:
    record = evaluate_point(ratio_spec, 0, {'r': 1.0})
    assert record.status == 'ok'
    assert record.values['E_B_inf'] == pytest.approx(bc.E_B_INF, rel=1e-9)
    assert record.values['eta_inf'] == pytest.approx(bc.ETA_INF, rel=1e-9)
    assert record.coupling == {'j': pytest.approx(0.02), 'phi': pytest.approx(math.pi/2)}


def test_closed_form_matches_integration() -> None:
    closed = SweepSpec(outputs=('E_A', 'E_B', 'eta', 'power'))
    integrated = SweepSpec(outputs=('E_A', 'E_B', 'eta', 'power'), use_closed_form=False)

    rec_closed = evaluate_point(closed, 0, {})
    rec_int = evaluate_point(integrated, 0, {})

    for oo in ('E_A', 'E_B', 'eta'):
        assert rec_closed.values[oo] == pytest.approx(rec_int.values[oo], rel=1e-6)
    # one-sided difference at the end of the grid
    assert rec_closed.values['power'] == pytest.approx(rec_int.values['power'], rel=1e-2)


def test_trajectory_output() -> None:
    spec = SweepSpec(outputs=('E_B', 'trajectory'), time=TimeSpec(100.0, 101))
    record = evaluate_point(spec, 0, {})
    assert record.status == 'ok'
    traj = record.trajectories['effective']
    assert traj.n_samples == 101
    assert record.values['E_B'] == traj.energy_b[-1]


def test_invalid_point() -> None:
    spec = SweepSpec(axes=(Axis('kappa_a', -0.01, 0.01, 3),), outputs=('E_B', 'E_B_inf'))
    records = run_sweep(spec)
    assert [rr.status for rr in records] == ['invalid', 'ok', 'ok']
    assert math.isnan(records[0].values['E_B'])
    assert math.isnan(records[0].values['E_B_inf'])
    assert records[0].message == 'Parameter kappa_a must be >= 0, got -0.01.'
    assert partial_failure(records)


def test_nonreciprocal_lock() -> None:
    spec = SweepSpec(axes=(Axis('g_b', 0.0, math.sqrt(0.4), 2),),
                     outputs=('E_B_inf',), nonreciprocal_lock=True)
    records = run_sweep(spec)
    assert records[0].status == 'nonreciprocal_infeasible'
    assert records[1].status == 'ok'
    assert records[1].coupling['j'] == pytest.approx(bc.GAMMA/2)
    assert records[1].values['E_B_inf'] == pytest.approx(bc.E_B_INF, rel=1e-9)


def test_ep_lock() -> None:
    spec = SweepSpec(axes=(Axis('delta', 0.0, 0.06, 2),),
                     outputs=('E_B_inf',), ep_lock=True)
    records = run_sweep(spec)
    assert records[0].status == 'ok'
    assert records[0].coupling['j'] == pytest.approx(bc.GAMMA/2, abs=1e-10)
    assert records[1].status == 'ep_infeasible'
    assert math.isnan(records[1].values['E_B_inf'])


def test_step_underflow_is_unstable() -> None:
    spec = SweepSpec(outputs=('E_B',), use_closed_form=False,
                     integrator=IntegratorConfig(min_step=1e3))
    record = evaluate_point(spec, 0, {})
    assert record.status == 'unstable'
    assert math.isnan(record.values['E_B'])


def test_both_models() -> None:
    spec = SweepSpec(outputs=('E_B_inf',), model='both')
    record = evaluate_point(spec, 0, {})
    assert record.status == 'ok'
    assert record.values['E_B_inf_full'] == pytest.approx(record.values['E_B_inf'], rel=1e-9)

    table = sweep_table(spec, [record])
    assert list(table.keys()) == ['j', 'phi', 'E_B_inf', 'E_B_inf_full', 'status']


def test_both_models_full_failure_keeps_effective() -> None:
    spec = SweepSpec(outputs=('E_B',), model='both',
                     integrator=IntegratorConfig(min_step=1e3))
    record = evaluate_point(spec, 0, {})
    effective = evaluate_point(SweepSpec(outputs=('E_B',)), 0, {})

    assert record.status == 'unstable'
    assert record.values['E_B'] == effective.values['E_B']
    assert math.isnan(record.values['E_B_full'])


def test_sweep_table(ratio_spec: SweepSpec) -> None:
    records = run_sweep(ratio_spec)
    table = sweep_table(ratio_spec, records)
    assert list(table.keys()) == ['r', 'j', 'phi', 'E_B_inf', 'eta_inf', 'status']
    assert table['r'] == pytest.approx([1.0, 4.0, 7.0, 10.0])
    assert table['status'] == ['ok']*4
    assert not partial_failure(records)
    # battery damping only lowers the stored energy
    e_b = records_array(records, 'E_B_inf')
    assert all(e_b[:-1] > e_b[1:])


@pytest.mark.parametrize(
    ('n_para', 'expected'),
    (
        (0, 1),
        (-1, 1),
        (2.5, min(2, os.cpu_count())),  # type: ignore
        (os.cpu_count() + 1, os.cpu_count())  # type: ignore
    )
)
def test_set_num_para(n_para: int, expected: int, ratio_spec: SweepSpec) -> None:
    herd = SweepHerd(ratio_spec)
    herd.set_num_para(n_para)
    assert herd._n_para == expected


def test_run_para_matches_sequential(ratio_spec: SweepSpec) -> None:
    herd = SweepHerd(ratio_spec)
    assert herd.get_sweep_time() < 0.0

    sequential = herd.run_sequential()
    herd.set_num_para(2)
    para = herd.run_para()

    assert herd.get_sweep_time() > 0.0
    assert [rr.index for rr in para] == [0, 1, 2, 3]
    for ss, pp in zip(sequential, para):
        assert ss.point == pp.point
        assert ss.values == pp.values
