import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ldgfrac.analysis import (ConvergencePoint, ConvergenceReport, SingularityCase, classify,
                              fit_order, l2_error, l2_error_at_T, predicted_for, predicted_order,
                              q_error_QT)
from ldgfrac.exceptions import DegenerateFit, InvalidForHyperbolic
from ldgfrac.fracfun import SingularSolution, exact_q
from ldgfrac.mesh import BrokenField, Mesh1D, project_exact, project_function

PI = math.pi


def test_predicted_order_examples():
    assert predicted_order("left-endpoint", PI) == pytest.approx(2 * PI + 1)
    assert predicted_order("left-endpoint", PI, diffusive=True) == pytest.approx(2 * PI - 1.5)
    assert predicted_order("fitted-interior", PI) == pytest.approx(2 * PI + 0.5)
    assert predicted_order("unfitted-interior", PI) == pytest.approx(PI + 0.5)
    assert predicted_order("unfitted-interior", PI, diffusive=True) == pytest.approx(PI - 0.5)
    # the Sobolev cap binds for the Heaviside integral (m = 1)
    assert predicted_order("left-endpoint", PI, m=1) == pytest.approx(PI + 0.5)
    assert predicted_order("left-endpoint", PI, m=1, diffusive=True) == pytest.approx(PI - 0.5)


@given(alpha=st.floats(0.6, 5.0), m=st.floats(1.0, 10.0))
@settings(max_examples=50, deadline=None)
def test_predicted_order_monotone(alpha, m):
    for case in SingularityCase:
        assert predicted_order(case, alpha, m) >= predicted_order(case, alpha, m, diffusive=True)
        assert predicted_order(case, alpha + 0.1, m) >= predicted_order(case, alpha, m)
        assert predicted_order(case, alpha, m + 0.5) >= predicted_order(case, alpha, m)


def test_classify():
    m = Mesh1D.uniform(0, 1, 4, 4)
    assert classify(SingularSolution.smooth(), m) is None
    assert classify(SingularSolution.power_left(), m) is SingularityCase.LEFT_ENDPOINT
    assert classify(SingularSolution.abs_power_interior(0.25), m) is SingularityCase.FITTED_INTERIOR
    assert classify(SingularSolution.abs_power_interior(0.125), m) is \
        SingularityCase.UNFITTED_INTERIOR
    assert predicted_for(SingularSolution.frac_int_heaviside(0.125), m, 0.0) == \
        pytest.approx(PI + 0.5)


def test_fit_exact_power():
    p = np.arange(4, 17)
    fit = fit_order(list(zip(p, 2.0 * p**-3.0)))
    assert fit.slope == pytest.approx(3.0, abs=1e-12) and fit.dropped == 0


def test_fit_drops_preasymptotic_prefix():
    p = np.arange(4, 17)
    e = p**-4.0
    e[:3] *= [5.0, 2.5, 1.5]
    fit = fit_order(list(zip(p, e)))
    assert fit.dropped >= 1 and fit.slope == pytest.approx(4.0, abs=0.05)


def test_fit_degenerate():
    with pytest.raises(DegenerateFit):
        fit_order([(p, 1e-15) for p in range(4, 10)])
    with pytest.raises(DegenerateFit):
        fit_order([(4, 1e-3), (5, 0.0), (6, 1e-5)])
    with pytest.raises(ValueError):
        fit_order([(4, 1.0), (5, 0.5)])


def test_l2_error_of_exact_field_is_zero():
    m = Mesh1D.uniform(0, 1, 3, 4)
    u = project_function(lambda x: x**3 - 2 * x, m)
    assert l2_error(u, lambda x: x**3 - 2 * x) <= 1e-14


def test_l2_error_constant_offset():
    m = Mesh1D.uniform(0, 2, 4, 3)
    u = project_function(lambda x: np.sin(x) + 0.5, m)
    assert l2_error(u, lambda x: np.sin(x) + 0 * x) == pytest.approx(0.5 * math.sqrt(2), rel=1e-8)


def test_l2_error_singular_oracle():
    # zero field against x^pi on (0, 1): the norm is 1/sqrt(2 pi + 1)
    s = SingularSolution.power_left()
    m = Mesh1D.uniform(0, 1, 4, 3)
    err = l2_error_at_T(BrokenField.zeros(m), s, m, 1.0)
    assert err == pytest.approx(1 / math.sqrt(2 * PI + 1), rel=1e-10)


def test_q_error_of_zero_field():
    s = SingularSolution.power_left()
    m = Mesh1D.uniform(0, 1, 2, 2)
    d = 0.1
    # q_h = 0: the error is the norm of the exact q, e(t) = sqrt(d) pi t |x^(pi-1)|
    norm1 = math.sqrt(d) * PI / math.sqrt(2 * PI - 1)
    times = np.linspace(0, 1, 201)
    got = q_error_QT(times, [BrokenField.zeros(m)] * times.size, s, d, m)
    assert got == pytest.approx(norm1 / math.sqrt(3), rel=1e-4)


def test_q_error_constant_offset_scaling():
    m = Mesh1D.uniform(0, 1, 4, 10)
    d = 0.1
    sm = SingularSolution.smooth()
    times = np.array([0.0, 0.5, 1.0, 1.5, 2.0])
    snaps = [project_function(lambda x, t=t: exact_q(sm, d, x, t) + 1e-3, m) for t in times]
    # error is the constant 1e-3 on a unit interval, so Q_T = 1e-3 sqrt(T)
    assert q_error_QT(times, snaps, sm, d, m) == pytest.approx(1e-3 * math.sqrt(2.0), rel=1e-6)


def test_q_error_hyperbolic_rejected():
    m = Mesh1D.uniform(0, 1, 2, 2)
    with pytest.raises(InvalidForHyperbolic):
        q_error_QT([0, 1], [BrokenField.zeros(m)] * 2, SingularSolution.smooth(), 0.0, m)


def _report(errs, predicted=3.0, **kw):
    pts = tuple(ConvergencePoint(p, e, audit_pass=True) for p, e in zip(range(4, 4 + len(errs)),
                                                                        errs))
    fit = fit_order([(pt.p, pt.error_u) for pt in pts])
    return ConvergenceReport("t", pts, fit.slope, predicted, 0.3, fit.dropped, **kw)


def test_report_pass_fail():
    p = np.arange(4, 12)
    assert _report(p**-3.0).passed
    assert not _report(p**-3.5).passed
    r = _report(p**-3.0, secondary_label="u+q", secondary_slope=2.0, secondary_predicted=3.0)
    assert not r.passed
    assert "passed=False" in r.summary() and "u+q_slope=2.0000" in r.summary()


def test_report_failed_audit_fails():
    pts = tuple(ConvergencePoint(p, float(p) ** -3, audit_pass=(p != 6)) for p in range(4, 10))
    r = ConvergenceReport("t", pts, 3.0, 3.0, 0.3)
    assert not r.audits_passed and not r.passed


def test_report_invariants():
    with pytest.raises(ValueError):
        ConvergenceReport("t", (ConvergencePoint(4, 0.0),) * 3, 1.0, 1.0, 0.3)
    with pytest.raises(ValueError):
        ConvergenceReport("t", (ConvergencePoint(4, 1.0),) * 3, 1.0, 1.0, 0.3, dropped=1)
    exact = ConvergenceReport("t", (ConvergencePoint(4, 0.0),), math.nan, None, 0.3, exact=True)
    assert exact.passed and "PASS-exact" in exact.summary()


def test_projected_exact_error_small():
    s = SingularSolution.power_left_modulated()
    m = Mesh1D.uniform(0, 1, 4, 10)
    err = l2_error_at_T(project_exact(s, m, 1.0), s, m, 1.0)
    assert 0 < err < 1e-8
