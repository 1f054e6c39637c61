"""Manufactured solutions with algebraic singularities and their fractional calculus.

Every catalog entry separates as ``u(x, t) = T(t) X(x)``. The spatial
profile ``X`` is a power ``|x - x0|^alpha`` (possibly times the smooth factor
``exp(2 + sin x)``), the Riemann-Liouville integral of a Heaviside step, or
a plain sine. The separation makes the forcing a two-term sum
``T'(t) X(x) + T(t) (c X' - d X'')``, which the LDG driver exploits.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gamma, rgamma

from .exceptions import FractionalDomainError, NotInSpace, SingularPointEvaluation
from .legendre import composite_rule


class SolutionKind(enum.Enum):
    POWER_LEFT = "power-left"
    POWER_LEFT_MODULATED = "power-left-modulated"
    FRAC_INT_HEAVISIDE = "frac-int-heaviside"
    ABS_POWER_INTERIOR = "abs-power-interior"
    SMOOTH = "smooth"


class SeminormVariant(enum.Enum):
    LEFT_ENDPOINT = "left-endpoint"
    RIGHT_ENDPOINT = "right-endpoint"
    INTERIOR = "interior"
    SOBOLEV = "sobolev"


@dataclass(frozen=True)
class FracSeminormValue:
    value: float
    variant: SeminormVariant


_TAYLOR_TERMS = 48


@dataclass(frozen=True)
class SingularSolution:
    """Closed-form exact solution with singularity metadata.

    ``m`` is the regularity index of the Caputo derivative (``math.inf`` when
    the Caputo derivative is smooth). ``theta`` is used by the interior kind
    and ``zeta`` by the Heaviside kind; left-endpoint kinds are singular at
    ``x = 0``.
    """

    kind: SolutionKind
    alpha: float = math.pi
    m: float = math.inf
    theta: float | None = None
    zeta: float | None = None

    def __post_init__(self):
        if self.kind is not SolutionKind.SMOOTH:
            if not self.alpha > 0 or float(self.alpha).is_integer():
                raise ValueError(f"alpha must be positive and non-integer, got {self.alpha}")
        if self.kind is SolutionKind.ABS_POWER_INTERIOR and self.theta is None:
            raise ValueError("interior singularity needs theta")
        if self.kind is SolutionKind.FRAC_INT_HEAVISIDE and (self.zeta is None or self.zeta <= 0):
            raise ValueError("Heaviside kink needs zeta > 0")
        if not (self.m >= 1):
            raise ValueError("m must be >= 1")

    # -- constructors -------------------------------------------------------
    @classmethod
    def power_left(cls, alpha: float = math.pi) -> "SingularSolution":
        return cls(SolutionKind.POWER_LEFT, alpha=alpha)

    @classmethod
    def power_left_modulated(cls, alpha: float = math.pi) -> "SingularSolution":
        return cls(SolutionKind.POWER_LEFT_MODULATED, alpha=alpha)

    @classmethod
    def frac_int_heaviside(cls, zeta: float, alpha: float = math.pi) -> "SingularSolution":
        return cls(SolutionKind.FRAC_INT_HEAVISIDE, alpha=alpha, m=1, zeta=zeta)

    @classmethod
    def abs_power_interior(cls, theta: float, alpha: float = math.pi) -> "SingularSolution":
        return cls(SolutionKind.ABS_POWER_INTERIOR, alpha=alpha, theta=theta)

    @classmethod
    def smooth(cls) -> "SingularSolution":
        return cls(SolutionKind.SMOOTH, alpha=1.0)

    # -- metadata -----------------------------------------------------------
    @property
    def singular_points(self) -> tuple[float, ...]:
        k = self.kind
        if k in (SolutionKind.POWER_LEFT, SolutionKind.POWER_LEFT_MODULATED):
            return (0.0,)
        if k is SolutionKind.FRAC_INT_HEAVISIDE:
            return (0.0, float(self.zeta))
        if k is SolutionKind.ABS_POWER_INTERIOR:
            return (float(self.theta),)
        return ()

    # -- time factor --------------------------------------------------------
    def time_factor(self, t: float) -> float:
        if self.kind in (SolutionKind.POWER_LEFT, SolutionKind.FRAC_INT_HEAVISIDE):
            return float(t)
        return math.exp(-t)

    def time_factor_deriv(self, t: float) -> float:
        if self.kind in (SolutionKind.POWER_LEFT, SolutionKind.FRAC_INT_HEAVISIDE):
            return 1.0
        return -math.exp(-t)

    # -- spatial profile ----------------------------------------------------
    def profile(self, x, order: int = 0):
        """``d^order X / dx^order`` at ``x`` (order 0, 1 or 2)."""
        if order not in (0, 1, 2):
            raise ValueError("profile derivatives are available up to order 2")
        x = np.asarray(x, dtype=float)
        k, a = self.kind, self.alpha
        if k is SolutionKind.SMOOTH:
            w = 2 * np.pi
            out = [np.sin(w * x), w * np.cos(w * x), -w * w * np.sin(w * x)][order]
        elif k is SolutionKind.POWER_LEFT:
            self._check_singular(x, 0.0, order)
            out = _power(x, a, order)
        elif k is SolutionKind.FRAC_INT_HEAVISIDE:
            self._check_singular(x, 0.0, order)
            z = self.zeta
            shifted = np.maximum(x - z, 0.0)
            out = (_power(x, a, order) - _power(shifted, a, order)) / math.gamma(a + 1)
        else:
            x0 = 0.0 if k is SolutionKind.POWER_LEFT_MODULATED else self.theta
            self._check_singular(x, x0, order)
            s = x - x0
            if k is SolutionKind.POWER_LEFT_MODULATED:
                pw = [_power(s, a, i) for i in range(order + 1)]
            else:
                pw = [_abs_power(s, a, i) for i in range(order + 1)]
            g = np.exp(2.0 + np.sin(x))
            g1 = np.cos(x) * g
            g2 = (np.cos(x) ** 2 - np.sin(x)) * g
            if order == 0:
                out = pw[0] * g
            elif order == 1:
                out = pw[1] * g + pw[0] * g1
            else:
                out = pw[2] * g + 2 * pw[1] * g1 + pw[0] * g2
        return out if np.ndim(out) else float(out)

    def _check_singular(self, x, x0, order):
        if order > self.alpha and np.any(x == x0):
            raise SingularPointEvaluation(
                f"derivative of order {order} of a power {self.alpha} is unbounded at x={x0}")

    # -- full solution ------------------------------------------------------
    def u(self, x, t):
        return self.time_factor(t) * self.profile(x, 0)

    def u_x(self, x, t):
        return self.time_factor(t) * self.profile(x, 1)

    def u_xx(self, x, t):
        return self.time_factor(t) * self.profile(x, 2)

    def u_t(self, x, t):
        return self.time_factor_deriv(t) * self.profile(x, 0)

    def transport_profile(self, c: float, d: float, x):
        """``c X' - d X''``, the spatial part multiplying T(t) in the forcing."""
        out = c * np.asarray(self.profile(x, 1))
        if d:
            out = out - d * np.asarray(self.profile(x, 2))
        return out

    # -- Caputo derivative --------------------------------------------------
    def caputo(self, x, t, side: str = "left", order: int = 0):
        """``D^order`` of the order-alpha Caputo derivative of u about its singular point.

        ``side='left'`` uses the lower derivative D_{x0+} (x > x0), ``'right'``
        the upper derivative D_{x0-} (x < x0). For the interior kind x0 is
        theta; otherwise x0 = 0 and only the left side exists.
        """
        return self.time_factor(t) * self.caputo_profile(x, side, order)

    def caputo_profile(self, x, side: str = "left", order: int = 0):
        """Same as :meth:`caputo` for the spatial profile X alone."""
        x = np.asarray(x, dtype=float)
        k = self.kind
        if k is SolutionKind.SMOOTH:
            raise NotInSpace("smooth solution has no singular point")
        if side not in ("left", "right"):
            raise ValueError(f"side must be 'left' or 'right', got {side!r}")
        if side == "right" and k is not SolutionKind.ABS_POWER_INTERIOR:
            raise NotInSpace(f"{k.value} has no right-sided singularity")
        if k is SolutionKind.FRAC_INT_HEAVISIDE:
            out = np.where(x < self.zeta, 1.0, 0.0) if order == 0 else np.zeros_like(x)
            return out if out.ndim else float(out)
        x0 = self.theta if k is SolutionKind.ABS_POWER_INTERIOR else 0.0
        y = x - x0 if side == "left" else x0 - x
        if np.any(y < 0):
            raise NotInSpace("point on the wrong side of the singularity")
        # d/dx = -d/dy on the right side
        out = np.polynomial.polynomial.polyval(y, _poly_deriv(self._caputo_series(side), order))
        if side == "right" and order % 2:
            out = -out
        return out if np.ndim(out) else float(out)

    def _caputo_series(self, side: str) -> np.ndarray:
        """Power-series coefficients in y = |x - x0| of D^alpha X."""
        a = self.alpha
        if self.kind is SolutionKind.POWER_LEFT:
            return np.array([math.gamma(a + 1)])
        x0 = self.theta if self.kind is SolutionKind.ABS_POWER_INTERIOR else 0.0
        g = _modulation_taylor(float(x0))
        j = np.arange(g.size)
        if side == "right":
            g = g * (-1.0) ** j
        # D^a y^(a+j) = Gamma(a+j+1)/Gamma(j+1) y^j
        return g * gamma(a + j + 1) / gamma(j + 1)


def _power(s, a, order):
    coef = 1.0
    for i in range(order):
        coef *= a - i
    with np.errstate(divide="ignore", invalid="ignore"):
        return coef * np.power(s, a - order)


def _abs_power(s, a, order):
    coef = 1.0
    for i in range(order):
        coef *= a - i
    with np.errstate(divide="ignore", invalid="ignore"):
        return coef * np.power(np.abs(s), a - order) * np.sign(s) ** order


def _poly_deriv(c: np.ndarray, order: int) -> np.ndarray:
    if order == 0:
        return c
    if order >= c.size:
        return np.zeros(1)
    return np.polynomial.polynomial.polyder(c, order)


@lru_cache(maxsize=64)
def _modulation_taylor(x0: float, n: int = _TAYLOR_TERMS) -> np.ndarray:
    """Taylor coefficients of exp(2 + sin(x0 + y)) in y."""
    a = np.zeros(n)
    s, c = math.sin(x0), math.cos(x0)
    fact = 1.0
    for k in range(n):
        if k:
            fact *= k
        # sin(x0 + y) = sum_k sin(x0 + k pi/2) y^k / k!
        a[k] = [s, c, -s, -c][k % 4] / fact
    a[0] += 2.0
    b = np.zeros(n)
    b[0] = math.exp(a[0])
    for k in range(1, n):
        i = np.arange(1, k + 1)
        b[k] = np.dot(i * a[i], b[k - i]) / k
    return b


def exact_u(s: SingularSolution, x, t):
    return s.u(x, t)


def exact_q(s: SingularSolution, d: float, x, t):
    """Auxiliary variable sqrt(d) u_x."""
    if d == 0:
        return np.zeros_like(np.asarray(x, dtype=float)) if np.ndim(x) else 0.0
    return math.sqrt(d) * s.u_x(x, t)


def forcing(s: SingularSolution, c: float, d: float, x, t):
    """Right-hand side f = u_t + c u_x - d u_xx."""
    return s.u_t(x, t) + s.time_factor(t) * s.transport_profile(c, d, x)


def caputo_left(beta: float, alpha: float, x):
    """Left Caputo derivative of order alpha of x^beta, taken from 0."""
    if not beta > -1:
        raise FractionalDomainError("need beta > -1")
    if not alpha > 0:
        raise FractionalDomainError("need alpha > 0")
    x = np.asarray(x, dtype=float)
    k = math.ceil(alpha)
    if float(beta).is_integer() and beta < k:
        out = np.zeros_like(x)
    elif not float(beta).is_integer() and beta <= k - 1:
        # k-th derivative x^(beta-k) is not integrable at 0
        raise FractionalDomainError(
            f"Caputo derivative of order {alpha} of x^{beta} does not exist")
    else:
        with np.errstate(divide="ignore"):
            out = math.gamma(beta + 1) * rgamma(beta - alpha + 1) * np.power(x, beta - alpha)
    return out if out.ndim else float(out)


def _l1_norm(fn, a: float, b: float, kinks=()) -> float:
    pts = sorted({a, b, *[k for k in kinks if a < k < b]})
    breaks = np.concatenate([np.linspace(lo, hi, 17)[:-1] for lo, hi in zip(pts[:-1], pts[1:])] + [[b]])
    rule = composite_rule(breaks, 24)
    return float(np.dot(rule.weights, np.abs(fn(rule.nodes))))


def seminorm(s: SingularSolution, t: float, element: tuple[float, float],
             variant: SeminormVariant | None = None, m: int | None = None) -> FracSeminormValue:
    """Fractional semi-norm of ``u(., t)`` on ``element``.

    The variant is inferred from where the singular point sits relative to
    the element unless given. ``m`` defaults to ``s.m``, or 1 when that is
    unbounded. The Heaviside kind is BV rather than W^{1,1}; its L^1 norm
    of the derivative is read as total variation.
    """
    lo, hi = map(float, element)
    if not lo < hi:
        raise ValueError("empty element")
    if m is None:
        m = 1 if math.isinf(s.m) else int(s.m)
    sing = s.singular_points
    if variant is None:
        variant = _infer_variant(s, lo, hi)
    T = abs(s.time_factor(t))

    if variant is SeminormVariant.SOBOLEV:
        if any(lo < p < hi for p in sing):
            raise NotInSpace("element contains a singular point; integer Sobolev norm is infinite")
        if s.kind is SolutionKind.SMOOTH:
            w = 2 * np.pi
            deriv = lambda x, i: w ** i * np.sin(w * x + i * np.pi / 2)
        else:
            if m > 2:
                raise NotInSpace("integer Sobolev norm implemented up to m = 2")
            if m > s.alpha and any(p in (lo, hi) for p in sing):
                raise NotInSpace("derivative not integrable at the singular endpoint")
            deriv = lambda x, i: s.profile(x, i)
        val = _l1_norm(lambda x: deriv(x, m), lo, hi)
        val += sum(abs(float(deriv(np.array([lo]), i)[0])) for i in range(m))
        return FracSeminormValue(T * val, variant)

    if s.kind is SolutionKind.SMOOTH:
        raise NotInSpace("smooth solution only has the Sobolev variant")

    if variant is SeminormVariant.LEFT_ENDPOINT:
        x0 = s.theta if s.kind is SolutionKind.ABS_POWER_INTERIOR else 0.0
        if lo != x0:
            raise NotInSpace(f"left-endpoint variant needs the singularity at {lo}")
        if s.kind is SolutionKind.FRAC_INT_HEAVISIDE:
            z = s.zeta
            if m > 1 and lo < z < hi:
                raise NotInSpace("Caputo derivative is a step; only m = 1 is finite")
            jump = 1.0 if lo < z < hi else 0.0
            trace = 1.0 if z > lo else 0.0
            return FracSeminormValue(T * (jump + trace), variant)
        body = _l1_norm(lambda x: s.caputo_profile(x, "left", m), lo, hi)
        traces = sum(abs(s.caputo_profile(lo, "left", i)) for i in range(m))
        return FracSeminormValue(T * (body + traces), variant)

    if variant is SeminormVariant.RIGHT_ENDPOINT:
        if s.kind is not SolutionKind.ABS_POWER_INTERIOR or hi != s.theta:
            raise NotInSpace("right-endpoint variant needs an interior singularity at the right end")
        body = _l1_norm(lambda x: s.caputo_profile(x, "right", m), lo, hi)
        traces = sum(abs(s.caputo_profile(hi, "right", i)) for i in range(m))
        return FracSeminormValue(T * (body + traces), variant)

    if s.kind is not SolutionKind.ABS_POWER_INTERIOR or not lo < s.theta < hi:
        raise NotInSpace("interior variant needs an interior singularity inside the element")
    th = s.theta
    val = (_l1_norm(lambda x: s.caputo_profile(x, "right", 1), lo, th)
           + _l1_norm(lambda x: s.caputo_profile(x, "left", 1), th, hi)
           + abs(s.caputo_profile(th, "right", 0)) + abs(s.caputo_profile(th, "left", 0)))
    return FracSeminormValue(T * val, variant)


def _infer_variant(s: SingularSolution, lo: float, hi: float) -> SeminormVariant:
    k = s.kind
    if k is SolutionKind.SMOOTH:
        return SeminormVariant.SOBOLEV
    if k is SolutionKind.ABS_POWER_INTERIOR:
        th = s.theta
        if th == lo:
            return SeminormVariant.LEFT_ENDPOINT
        if th == hi:
            return SeminormVariant.RIGHT_ENDPOINT
        if lo < th < hi:
            return SeminormVariant.INTERIOR
        return SeminormVariant.SOBOLEV
    if lo == 0.0:
        return SeminormVariant.LEFT_ENDPOINT
    if k is SolutionKind.FRAC_INT_HEAVISIDE and lo < s.zeta < hi:
        raise NotInSpace("kink inside an element away from the origin has no variant here")
    return SeminormVariant.SOBOLEV
