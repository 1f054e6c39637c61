import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from ldgfrac.exceptions import FractionalDomainError, NotInSpace, SingularPointEvaluation
from ldgfrac.fracfun import (SeminormVariant, SingularSolution, SolutionKind, caputo_left,
                             exact_q, exact_u, forcing, seminorm)

PI = math.pi
CATALOG = [
    SingularSolution.power_left(),
    SingularSolution.power_left_modulated(),
    SingularSolution.frac_int_heaviside(0.125),
    SingularSolution.abs_power_interior(0.25),
    SingularSolution.smooth(),
]


def fd(fn, x, h=1e-6):
    return (fn(x + h) - fn(x - h)) / (2 * h)


# -- values -----------------------------------------------------------------------

def test_power_left_values():
    s = SingularSolution.power_left()
    assert exact_u(s, 0.0, 1.0) == 0.0
    assert exact_u(s, 1.0, 0.5) == pytest.approx(0.5)


def test_heaviside_left_branch():
    s = SingularSolution.frac_int_heaviside(0.125)
    assert exact_u(s, 0.1, 1.0) == pytest.approx(0.1**PI / math.gamma(PI + 1))


def test_heaviside_right_branch():
    s = SingularSolution.frac_int_heaviside(0.125)
    x = 0.6
    assert exact_u(s, x, 2.0) == pytest.approx(2 * (x**PI - (x - 0.125) ** PI) / math.gamma(PI + 1))


def test_modulated_and_smooth():
    x, t = 0.3, 0.4
    s = SingularSolution.power_left_modulated()
    assert exact_u(s, x, t) == pytest.approx(x**PI * math.exp(2 + math.sin(x) - t))
    s = SingularSolution.abs_power_interior(0.25)
    assert exact_u(s, 0.1, t) == pytest.approx(0.15**PI * math.exp(2 + math.sin(0.1) - t))
    s = SingularSolution.smooth()
    assert exact_u(s, x, t) == pytest.approx(math.sin(2 * PI * x) * math.exp(-t))


@pytest.mark.parametrize("kwargs", [
    dict(kind=SolutionKind.POWER_LEFT, alpha=2.0),
    dict(kind=SolutionKind.POWER_LEFT, alpha=-0.5),
    dict(kind=SolutionKind.ABS_POWER_INTERIOR, alpha=1.5),
    dict(kind=SolutionKind.FRAC_INT_HEAVISIDE, alpha=PI),
])
def test_invalid_solutions(kwargs):
    with pytest.raises(ValueError):
        SingularSolution(**kwargs)


# -- derivatives ------------------------------------------------------------------

def test_exact_q():
    s = SingularSolution.power_left()
    assert exact_q(s, 1.0, 1.0, 1.0) == pytest.approx(PI)
    assert exact_q(s, 0.0, 0.4, 1.0) == 0.0
    np.testing.assert_array_equal(exact_q(s, 0.0, np.linspace(0, 1, 5), 1.0), 0.0)


def test_exact_q_interior_fd_oracle():
    s = SingularSolution.abs_power_interior(0.25)
    got = exact_q(s, 0.09, 0.5, 0.0)
    ref = 0.3 * fd(lambda x: exact_u(s, x, 0.0), 0.5)
    assert got == pytest.approx(ref, rel=1e-6)


def test_singular_point_evaluation_raises():
    s = SingularSolution.power_left(alpha=0.5)
    with pytest.raises(SingularPointEvaluation):
        exact_q(s, 1.0, 0.0, 1.0)


def test_forcing_closed_forms():
    s = SingularSolution.smooth()
    x, t = 0.3, 0.7
    assert forcing(s, 0, 0, x, t) == pytest.approx(-math.sin(2 * PI * x) * math.exp(-t))
    s = SingularSolution.power_left()
    assert forcing(s, 0.1, 0, x, t) == pytest.approx(x**PI + 0.1 * PI * x ** (PI - 1) * t)


@pytest.mark.parametrize("s", CATALOG, ids=lambda s: s.kind.value)
def test_pde_consistency_fd(s):
    """f = u_t + c u_x - d u_xx under independent finite differences."""
    c, d = 0.1, 0.1
    rng = np.random.default_rng(1)
    pts = rng.uniform(0.02, 0.98, 20)
    pts = pts[np.min(np.abs(pts[:, None] - np.array(s.singular_points or [9.0])), axis=1) > 0.02]
    for x in pts:
        t = float(rng.uniform(0.1, 1.0))
        u = lambda x_, t_: float(exact_u(s, x_, t_))
        ut = (u(x, t + 1e-5) - u(x, t - 1e-5)) / 2e-5
        ux = (u(x + 1e-5, t) - u(x - 1e-5, t)) / 2e-5
        uxx = (u(x + 1e-4, t) - 2 * u(x, t) + u(x - 1e-4, t)) / 1e-8
        ref = ut + c * ux - d * uxx
        assert float(forcing(s, c, d, x, t)) == pytest.approx(ref, rel=1e-5, abs=1e-6)


def test_modulated_forcing_fd_oracle():
    s = SingularSolution.power_left_modulated()
    x, t = 0.5, 0.5
    u = lambda x_, t_: float(exact_u(s, x_, t_))
    ref = ((u(x, t + 1e-5) - u(x, t - 1e-5)) / 2e-5 + 0.1 * (u(x + 1e-5, t) - u(x - 1e-5, t)) / 2e-5
           - 0.1 * (u(x + 1e-4, t) - 2 * u(x, t) + u(x - 1e-4, t)) / 1e-8)
    assert float(forcing(s, 0.1, 0.1, x, t)) == pytest.approx(ref, rel=1e-5)


# -- Caputo ---------------------------------------------------------------------------

def test_caputo_left_examples():
    assert caputo_left(PI, PI, 0.3) == pytest.approx(math.gamma(PI + 1))
    assert caputo_left(2, 1, 0.5) == pytest.approx(1.0)
    assert caputo_left(1, 2, 0.5) == 0.0


def test_caputo_left_quadrature_oracle():
    x = 0.8
    # the (x - s)^(k-alpha-1) weight handled by scipy's algebraic weight option
    k = 1
    ref = integrate.quad(lambda s: 2.5 * s**1.5, 0, x, weight="alg",
                         wvar=(0, k - 0.7 - 1))[0] / math.gamma(k - 0.7)
    assert caputo_left(2.5, 0.7, x) == pytest.approx(ref, rel=1e-8)


def test_caputo_domain_error():
    with pytest.raises(FractionalDomainError):
        caputo_left(0.5, 2.5, 0.3)
    with pytest.raises(FractionalDomainError):
        caputo_left(-2, 0.5, 0.3)


@given(beta=st.floats(1.05, 6.0), alpha=st.floats(0.05, 0.95), x=st.floats(0.05, 2.0))
@settings(max_examples=40, deadline=None)
def test_caputo_order_one_formula(beta, alpha, x):
    ref = math.gamma(beta + 1) / math.gamma(beta - alpha + 1) * x ** (beta - alpha)
    assert caputo_left(beta, alpha, x) == pytest.approx(ref, rel=1e-12)


def test_caputo_scaling_law():
    """Caputo derivative of the pulled-back power on (-1, 1) is (h/2)^alpha times the physical one."""
    h, beta, alpha = 0.25, 2.5, 0.7
    xi = np.linspace(-0.9, 0.9, 10)
    x = h / 2 * (1 + xi)
    # x^beta pulled back is (h/2)^beta (1 + xi)^beta
    on_reference = (h / 2) ** beta * caputo_left(beta, alpha, 1 + xi)
    np.testing.assert_allclose(on_reference, (h / 2) ** alpha * caputo_left(beta, alpha, x),
                               rtol=1e-10)


def test_caputo_profile_integrates_back():
    """For the modulated kind, I^alpha applied to the Caputo series returns X."""
    s = SingularSolution.power_left_modulated(alpha=1.3)
    x = 0.4
    # X(0) = X'(0) = 0, so I^1.3 D^1.3 X = X
    val = integrate.quad(lambda y: s.caputo_profile(y) * (x - y) ** 0.3, 0, x)[0] / math.gamma(1.3)
    assert val == pytest.approx(float(s.profile(x)), rel=1e-9)


def test_heaviside_caputo_is_step():
    s = SingularSolution.frac_int_heaviside(0.125)
    assert s.caputo(0.05, 2.0) == pytest.approx(2.0)
    assert s.caputo(0.5, 2.0) == 0.0
    # linearity check against caputo_left on each piece (x < zeta)
    assert caputo_left(PI, PI, 0.05) / math.gamma(PI + 1) == pytest.approx(1.0)


def test_interior_caputo_sides():
    s = SingularSolution.abs_power_interior(0.25, alpha=1.2)
    with pytest.raises(NotInSpace):
        s.caputo_profile(0.1, "left")
    assert np.isfinite(s.caputo_profile(0.1, "right"))
    assert np.isfinite(s.caputo_profile(0.4, "left"))


# -- semi-norms ------------------------------------------------------------------------

def test_seminorm_power_left():
    s = SingularSolution.power_left()
    val = seminorm(s, 1.0, (0, 0.25))
    assert val.variant is SeminormVariant.LEFT_ENDPOINT
    assert val.value == pytest.approx(special.gamma(PI + 1))


def test_seminorm_smooth_finite():
    val = seminorm(SingularSolution.smooth(), 1.0, (0, 0.25))
    assert val.variant is SeminormVariant.SOBOLEV
    assert np.isfinite(val.value) and val.value > 0


def test_seminorm_heaviside_total_variation():
    # Caputo derivative is H(zeta - x) t: trace t at 0 plus one jump of size t
    val = seminorm(SingularSolution.frac_int_heaviside(0.125), 1.0, (0, 0.25))
    assert val.value == pytest.approx(2.0)


def test_seminorm_interior_variants():
    s = SingularSolution.abs_power_interior(0.125)
    assert seminorm(s, 0.5, (0, 0.25)).variant is SeminormVariant.INTERIOR
    s = SingularSolution.abs_power_interior(0.25)
    assert seminorm(s, 0.5, (0, 0.25)).variant is SeminormVariant.RIGHT_ENDPOINT
    assert seminorm(s, 0.5, (0.25, 0.5)).variant is SeminormVariant.LEFT_ENDPOINT


def test_seminorm_wrong_variant():
    with pytest.raises(NotInSpace):
        seminorm(SingularSolution.smooth(), 1.0, (0, 0.25), SeminormVariant.LEFT_ENDPOINT)
    with pytest.raises(NotInSpace):
        seminorm(SingularSolution.power_left(), 1.0, (0, 0.25), SeminormVariant.RIGHT_ENDPOINT)
