'''
==============================================================================
TEST: Drift matrix spectrum and exceptional point solver
==============================================================================
'''
import math
from dataclasses import replace
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from nrbattery.spectrum import (DriftMatrix,
                                NoRealSolution,
                                NonConvergence,
                                drift_matrix,
                                spectral,
                                closed_form_j_ep,
                                ep_tolerance,
                                solve_ep,
                                trace_ep_curve)
import tests.batterychecker as bc


def j_ep_formula(delta: float, ratio: float) -> float:
    gap = 0.003*(1.0 - ratio)
    return 0.5*math.sqrt(bc.GAMMA**2 - delta**2 + gap**2/4.0)


def test_drift_matrix_baseline() -> None:
    dm = drift_matrix(bc.baseline_effective())
    assert dm.a == pytest.approx(-bc.LAMBDA/2)
    assert dm.d == pytest.approx(-bc.LAMBDA/2)
    assert abs(dm.b) < 1e-15
    assert dm.c == pytest.approx(complex(0.0, -bc.GAMMA))
    assert dm.trace == pytest.approx(-bc.LAMBDA)
    np.testing.assert_allclose(dm.drive, [-0.1j, 0.0])


def test_baseline_is_exceptional_point() -> None:
    report = spectral(drift_matrix(bc.baseline_effective()))
    assert report.is_ep
    assert report.eigvec_overlap == 1.0
    assert report.lambda_plus == pytest.approx(-bc.LAMBDA/2)
    assert report.lambda_minus == pytest.approx(-bc.LAMBDA/2)


def test_reciprocal_point_is_not_exceptional() -> None:
    dm = drift_matrix(bc.baseline_effective().with_coupling(phi=0.0))
    report = spectral(dm)
    assert not report.is_ep
    assert abs(report.discriminant) == pytest.approx(0.0032)
    assert report.eigvec_overlap < 0.9


def test_scalar_matrix_is_not_exceptional() -> None:
    dm = DriftMatrix(np.diag([-1.0 + 0.0j, -1.0 + 0.0j]), np.zeros(2, dtype=np.complex128))
    report = spectral(dm)
    assert report.discriminant == 0.0
    assert report.eigvec_overlap == 0.0
    assert not report.is_ep


@settings(max_examples=50)
@given(st.floats(min_value=0.0, max_value=0.1),
       st.floats(min_value=0.0, max_value=2*math.pi),
       st.floats(min_value=-0.1, max_value=0.1),
       st.floats(min_value=0.1, max_value=10.0))
def test_eigenvalue_identities(j: float, phi: float, delta: float, ratio: float) -> None:
    eff = (bc.baseline_effective().with_coupling(j=j, phi=phi)
           .with_detuning(delta).with_damping_ratio(ratio))
    dm = drift_matrix(eff)
    report = spectral(dm)

    assert report.lambda_plus + report.lambda_minus == pytest.approx(dm.trace, abs=1e-12)
    assert report.lambda_plus*report.lambda_minus == pytest.approx(dm.det, abs=1e-12)
    expected = np.linalg.eigvals(dm.m)
    for lam in (report.lambda_plus, report.lambda_minus):
        assert np.min(np.abs(expected - lam)) < 1e-7


@pytest.mark.parametrize(('delta', 'ratio'), ((0.0, 1.0), (0.0, 10.0),
                                              (0.03, 1.0), (-0.02, 1.0)))
def test_closed_form_j_ep(delta: float, ratio: float) -> None:
    eff = bc.detuned_effective(delta).with_damping_ratio(ratio)
    assert closed_form_j_ep(eff) == pytest.approx(j_ep_formula(delta, ratio), rel=1e-9)


def test_closed_form_j_ep_band_edge() -> None:
    eff = bc.baseline_effective()
    assert closed_form_j_ep(eff.with_detuning(eff.gamma_diss)) == pytest.approx(0.0, abs=1e-9)


def test_closed_form_j_ep_no_solution() -> None:
    with pytest.raises(NoRealSolution):
        closed_form_j_ep(bc.detuned_effective(0.06))


def test_solve_ep_baseline() -> None:
    sols = solve_ep(bc.baseline_effective())
    assert len(sols) == 1
    assert sols[0].values['j'] == pytest.approx(bc.GAMMA/2, abs=1e-10)
    assert sols[0].overlap > 0.9999


@pytest.mark.parametrize('use_closed_form', (True, False))
def test_solve_ep_ratio_10(use_closed_form: bool) -> None:
    eff = bc.baseline_effective().with_damping_ratio(10.0)
    sols = solve_ep(eff, ('j',), use_closed_form=use_closed_form)

    for ss in sols:
        assert ss.values['j'] == pytest.approx(bc.J_EP_RATIO_10, abs=1e-10)
        assert ss.residual < 1e-12
        assert ss.overlap > 0.9999
    assert sols[0].values['j'] == pytest.approx(0.021108, abs=1e-6)


def test_solve_ep_for_ratio() -> None:
    eff = bc.baseline_effective().with_coupling(j=bc.J_EP_RATIO_10)
    sols = solve_ep(eff, 'r')
    assert len(sols) == 1
    assert sols[0].values['r'] == pytest.approx(10.0, rel=1e-6)


def test_solve_ep_detuned_no_solution() -> None:
    eff = bc.baseline_effective()
    with pytest.raises(NoRealSolution):
        solve_ep(eff.with_detuning(1.5*eff.gamma_diss))


def test_solve_ep_detuned_nonconvergence() -> None:
    eff = bc.baseline_effective()
    with pytest.raises(NonConvergence) as err_info:
        solve_ep(eff.with_detuning(1.5*eff.gamma_diss), use_closed_form=False)

    assert err_info.value.best_residual > 1e-4


@pytest.mark.parametrize(
    ('free', 'expected'),
    (
        (('x',), "Unknown free variable \"x\", expected one of ('j', 'phi', 'delta_b_p', 'r')."),
        (('j', 'j'), "Need one or two distinct free variables, got ('j', 'j')."),
        (('j', 'phi', 'r'), "Need one or two distinct free variables, got ('j', 'phi', 'r')."),
    )
)
def test_solve_ep_free_err(free: tuple[str, ...], expected: str) -> None:
    with pytest.raises(ValueError) as err_info:
        solve_ep(bc.baseline_effective(), free)

    (msg,) = err_info.value.args
    assert msg == expected


def test_trace_ep_curve_in_ratio() -> None:
    curve = trace_ep_curve(bc.baseline_effective(), 'j', 'r', 1.0, 10.0, step=0.5)
    assert len(curve) == 19
    for ss in curve:
        assert ss is not None
        assert ss.values['j'] == pytest.approx(j_ep_formula(0.0, ss.values['r']), rel=1e-9)


def test_trace_ep_curve_gaps() -> None:
    curve = trace_ep_curve(bc.baseline_effective(), 'j', 'delta_b_p', -0.06, 0.06,
                           step=0.015)
    assert len(curve) == 9
    feasible = [ss is not None for ss in curve]
    assert feasible == [False, False, True, True, True, True, True, False, False]
    for ss in curve:
        if ss is not None:
            delta = ss.values['delta_b_p']
            assert ss.values['j'] == pytest.approx(j_ep_formula(delta, 1.0), rel=1e-8)


def test_solve_ep_with_span() -> None:
    sols = solve_ep(bc.baseline_effective(), ('j', 'r'), span=(1.0, 2.0))
    assert len(sols) == 1001
    assert sols[-1].values['r'] == pytest.approx(2.0)
    assert sols[-1].values['j'] == pytest.approx(j_ep_formula(0.0, 2.0), rel=1e-9)


RATE_FIELDS = ('delta_a_p', 'delta_b_p', 'gamma_a_eff', 'gamma_b_eff', 'g_coh',
               'gamma_diss', 'j', 'epsilon', 'kappa_a', 'kappa_b', 'omega_a', 'omega_b')


@pytest.mark.parametrize('scale', (1.0, 1e3, 1e5))
def test_solve_ep_frequency_unit_cancels(scale: float) -> None:
    eff = bc.baseline_effective().with_damping_ratio(10.0)
    eff = replace(eff, **{ff: scale*getattr(eff, ff) for ff in RATE_FIELDS})

    sols = solve_ep(eff, ('j',), use_closed_form=False)

    for ss in sols:
        assert ss.values['j']/scale == pytest.approx(bc.J_EP_RATIO_10, rel=1e-8)
        assert ss.residual < ep_tolerance(drift_matrix(ss.params))
