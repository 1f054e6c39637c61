"""L2 and Gauss-Radau projections on the reference element, and their error behaviour.

The Radau projections are built from the truncated Legendre series plus a
correction of the top mode, which is the unique degree-p polynomial that is
orthogonal to P_{p-1} and interpolates at one endpoint.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import mpmath
import numpy as np

from .exceptions import DegenerateFit
from .legendre import (QuadratureRule, graded_rule, legendre_coeffs,
                       legendre_series, legendre_vandermonde)

PROJECTIONS = ("minus", "plus", "l2")
SHAPES = ("left", "right", "interior", "smooth", "polynomial")
_CUBIC = np.array([1.0, 1.0, 0.0, -2.0])  # 1 + xi - 2 xi^3


@dataclass(frozen=True)
class ProjectionErrors:
    l2_error: float
    left_trace_error: float
    right_trace_error: float


def reference_rule(p: int, singular: Sequence[float] = ()) -> QuadratureRule:
    """Quadrature on (-1, 1) good enough for Legendre coefficients up to degree p."""
    return graded_rule(-1.0, 1.0, singular, points=max(20, p + 12))


def l2_project(f: Callable, p: int, quad: QuadratureRule) -> np.ndarray:
    if p < 0:
        raise ValueError("degree must be non-negative")
    return legendre_coeffs(f, p, quad)


def gauss_radau_minus(f: Callable, p: int, quad: QuadratureRule,
                      trace: float | None = None) -> np.ndarray:
    """Degree-p projection orthogonal to P_{p-1} that matches f at xi = 1."""
    if p < 1:
        raise ValueError("Gauss-Radau projection needs p >= 1")
    c = legendre_coeffs(f, p, quad)
    right = float(f(np.array([1.0]))[0]) if trace is None else trace
    c[p] = right - c[:p].sum()
    return c


def gauss_radau_plus(f: Callable, p: int, quad: QuadratureRule,
                     trace: float | None = None) -> np.ndarray:
    """Degree-p projection orthogonal to P_{p-1} that matches f at xi = -1."""
    if p < 1:
        raise ValueError("Gauss-Radau projection needs p >= 1")
    c = legendre_coeffs(f, p, quad)
    left = float(f(np.array([-1.0]))[0]) if trace is None else trace
    signs = (-1.0) ** np.arange(p)
    c[p] = (-1.0) ** p * (left - np.dot(signs, c[:p]))
    return c


def project(f: Callable, p: int, quad: QuadratureRule, kind: str) -> np.ndarray:
    if kind == "minus":
        return gauss_radau_minus(f, p, quad)
    if kind == "plus":
        return gauss_radau_plus(f, p, quad)
    if kind == "l2":
        return l2_project(f, p, quad)
    raise ValueError(f"unknown projection {kind!r}")


def projection_errors(f: Callable, coeffs, quad: QuadratureRule) -> ProjectionErrors:
    coeffs = np.asarray(coeffs, dtype=float)
    diff = f(quad.nodes) - legendre_series(coeffs, quad.nodes)
    l2 = math.sqrt(max(float(np.dot(quad.weights, diff * diff)), 0.0))
    ends = np.array([-1.0, 1.0])
    tr = np.abs(f(ends) - legendre_series(coeffs, ends))
    return ProjectionErrors(l2, float(tr[0]), float(tr[1]))


# -- reference singular functions ----------------------------------------------

@dataclass(frozen=True)
class ReferenceFunction:
    """Model function on (-1, 1): (1+xi)^a, (1-xi)^a, |xi-theta|^a, exp(xi), or a cubic.

    Calls accept numpy arrays; :meth:`mp` and :meth:`mp_deriv` evaluate one
    mpmath number at the working precision.
    """

    shape: str
    alpha: float = 0.5
    theta: float = 0.0

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown shape {self.shape!r}")
        if self.shape == "interior" and not -1.0 < self.theta < 1.0:
            raise ValueError("interior singularity must lie in (-1, 1)")

    @property
    def singular_points(self) -> tuple[float, ...]:
        return {"left": (-1.0,), "right": (1.0,), "interior": (self.theta,)}.get(self.shape, ())

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        a = self.alpha
        if self.shape == "left":
            return np.power(1.0 + x, a)
        if self.shape == "right":
            return np.power(1.0 - x, a)
        if self.shape == "interior":
            return np.power(np.abs(x - self.theta), a)
        if self.shape == "polynomial":
            return np.polynomial.polynomial.polyval(x, _CUBIC)
        return np.exp(x)

    def deriv(self, x):
        x = np.asarray(x, dtype=float)
        a = self.alpha
        with np.errstate(divide="ignore"):
            if self.shape == "left":
                return a * np.power(1.0 + x, a - 1)
            if self.shape == "right":
                return -a * np.power(1.0 - x, a - 1)
            if self.shape == "interior":
                return a * np.power(np.abs(x - self.theta), a - 1) * np.sign(x - self.theta)
        if self.shape == "polynomial":
            return np.polynomial.polynomial.polyval(x, np.polynomial.polynomial.polyder(_CUBIC))
        return np.exp(x)

    def mp(self, x):
        a = mpmath.mpf(self.alpha)
        if self.shape == "left":
            return (1 + x) ** a
        if self.shape == "right":
            return (1 - x) ** a
        if self.shape == "interior":
            return abs(x - mpmath.mpf(self.theta)) ** a
        if self.shape == "polynomial":
            return mpmath.polyval([float(v) for v in _CUBIC[::-1]], x)
        return mpmath.exp(x)

    def mp_deriv(self, x):
        a = mpmath.mpf(self.alpha)
        if self.shape == "left":
            return a * (1 + x) ** (a - 1)
        if self.shape == "right":
            return -a * (1 - x) ** (a - 1)
        if self.shape == "interior":
            d = x - mpmath.mpf(self.theta)
            return a * abs(d) ** (a - 1) * mpmath.sign(d)
        if self.shape == "polynomial":
            der = np.polynomial.polynomial.polyder(_CUBIC)
            return mpmath.polyval([float(v) for v in der[::-1]], x)
        return mpmath.exp(x)


def predicted_projection_rate(shape: str, alpha: float, proj: str, quantity: str = "l2",
                              m: float = math.inf) -> float | None:
    """Algebraic decay exponent in p of the projection error for a model function."""
    if shape in ("smooth", "polynomial"):
        return None
    if shape == "interior":
        # traces sit at the smooth endpoints and are not covered by a rate claim
        return alpha + 0.5 if quantity == "l2" else None
    cap = alpha + m - 0.5
    if quantity == "trace":
        if proj == "l2":
            return None
        return min(2 * alpha, cap)
    interpolated_end = {"minus": "right", "plus": "left"}.get(proj)
    if proj == "l2" or interpolated_end != shape:
        # Pi_p or the Radau projection interpolating away from the singularity
        return min(2 * alpha + 1, cap)
    return min(2 * alpha + 0.5, cap)


# -- identities ----------------------------------------------------------------

@dataclass(frozen=True)
class IdentityResidual:
    """|LHS - RHS| of both Radau identities, absolute and relative to the LHS."""

    norm_abs: float
    norm_rel: float
    trace_abs: float
    trace_rel: float


def _rel(a, b):
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


def radau_identity_check(f: Callable, fprime: Callable, p: int, sign: str = "minus",
                         singular: Sequence[float] = (), dps: int | None = None
                         ) -> IdentityResidual:
    """Residuals of the Radau error identities.

    In double precision the relative accuracy is limited to roughly
    1e-16 / ||f - Pi f||. With ``dps`` set, ``f`` must be a
    :class:`ReferenceFunction` and both sides are evaluated with
    ``dps``-digit tanh-sinh quadrature instead.
    """
    if dps is not None:
        if not isinstance(f, ReferenceFunction):
            raise TypeError("extended precision needs a ReferenceFunction")
        return radau_identity_check_mp(f, [p], [sign], dps)[(p, sign)]
    quad = reference_rule(p + 1, singular)
    coeffs = legendre_coeffs(f, p + 1, quad)
    dcoeffs = legendre_coeffs(fprime, p + 1, quad)
    radau = project(f, p, quad, sign)
    l2 = np.zeros(p + 1)
    l2[:] = coeffs[: p + 1]
    err_radau = projection_errors(f, radau, quad)
    err_l2 = projection_errors(f, l2, quad)
    lhs = err_radau.l2_error ** 2
    rhs = err_l2.l2_error ** 2 + _norm_correction(dcoeffs[p], dcoeffs[p + 1], p, sign)
    trace_lhs = err_radau.left_trace_error if sign == "minus" else err_radau.right_trace_error
    trace_rhs = 2.0 * abs(dcoeffs[p]) / (2 * p + 1)
    return IdentityResidual(abs(lhs - rhs), _rel(lhs, rhs),
                            abs(trace_lhs - trace_rhs), _rel(trace_lhs, trace_rhs))


def _norm_correction(dp, dp1, p, sign):
    s = 1.0 if sign == "minus" else -1.0
    return 2.0 / (2 * p + 1) * (dp / (2 * p + 1) + s * dp1 / (2 * p + 3)) ** 2


@dataclass
class _TanhSinh:
    """Tanh-sinh nodes and weights on a list of subintervals, in mpmath."""

    breaks: Sequence
    step: object = None
    nodes: list = field(default_factory=list)
    weights: list = field(default_factory=list)

    def __post_init__(self):
        mp = mpmath.mp
        h = self.step or mpmath.mpf(1) / 64
        tiny = mpmath.mpf(10) ** (-mp.dps)
        half_pi = mp.pi / 2
        for a, b in zip(self.breaks[:-1], self.breaks[1:]):
            a, b = mpmath.mpf(a), mpmath.mpf(b)
            mid, rad = (a + b) / 2, (b - a) / 2
            k = 0
            while True:
                t = k * h
                u = half_pi * mpmath.sinh(t)
                # 1 - tanh(u) computed without cancellation
                gap = 2 / (mpmath.exp(2 * u) + 1)
                w = h * half_pi * mpmath.cosh(t) / mpmath.cosh(u) ** 2
                if gap < tiny:
                    break
                x = 1 - gap
                if k == 0:
                    self.nodes.append(mid)
                    self.weights.append(rad * w)
                else:
                    self.nodes.extend([mid + rad * x, mid - rad * x])
                    self.weights.extend([rad * w, rad * w])
                k += 1

    def integrate(self, values) -> mpmath.mpf:
        return mpmath.fdot(self.weights, values)


def _mp_legendre_table(p: int, xs) -> list[list]:
    """rows[n][i] = L_n(xs[i]) in mpmath."""
    rows = [[mpmath.mpf(1)] * len(xs), list(xs)]
    for k in range(1, p):
        prev, cur = rows[k - 1], rows[k]
        rows.append([((2 * k + 1) * x * c - k * q) / (k + 1) for x, c, q in zip(xs, cur, prev)])
    return rows[: p + 1]


def radau_identity_check_mp(func: ReferenceFunction, p_values: Sequence[int],
                            signs: Sequence[str] = ("minus", "plus"),
                            dps: int = 140) -> dict[tuple[int, str], IdentityResidual]:
    """Radau identity residuals evaluated with tanh-sinh quadrature at ``dps`` digits.

    Both sides are computed independently: the left sides from the actual
    projection error (coefficients of f, trace of f), the right sides from
    the Legendre coefficients of f'. Coefficients are shared across p.
    """
    pmax = max(p_values)
    out = {}
    with mpmath.workdps(dps):
        breaks = [-1, 1]
        if func.shape == "interior":
            breaks = [-1, func.theta, 1]
        ts = _TanhSinh(breaks)
        xs = ts.nodes
        fx = [func.mp(x) for x in xs]
        dfx = [func.mp_deriv(x) for x in xs]
        table = _mp_legendre_table(pmax + 1, xs)
        wf = [w * v for w, v in zip(ts.weights, fx)]
        wdf = [w * v for w, v in zip(ts.weights, dfx)]
        coef = [mpmath.mpf(2 * n + 1) / 2 * mpmath.fdot(wf, table[n]) for n in range(pmax + 2)]
        dcoef = [mpmath.mpf(2 * n + 1) / 2 * mpmath.fdot(wdf, table[n]) for n in range(pmax + 2)]
        f_left, f_right = func.mp(mpmath.mpf(-1)), func.mp(mpmath.mpf(1))

        def l2_error_sq(c):
            vals = [fv - mpmath.fsum(c[n] * table[n][i] for n in range(len(c)))
                    for i, fv in enumerate(fx)]
            return ts.integrate([v * v for v in vals])

        for p in p_values:
            tail = l2_error_sq(coef[: p + 1])
            for sign in signs:
                c = list(coef[: p + 1])
                if sign == "minus":
                    c[p] = f_right - mpmath.fsum(c[:p])
                    trace_lhs = abs(f_left - mpmath.fsum(c[n] * (-1) ** n for n in range(p + 1)))
                    s = 1
                else:
                    c[p] = (-1) ** p * (f_left - mpmath.fsum(c[n] * (-1) ** n for n in range(p)))
                    trace_lhs = abs(f_right - mpmath.fsum(c))
                    s = -1
                lhs = l2_error_sq(c)
                rhs = tail + mpmath.mpf(2) / (2 * p + 1) * (
                    dcoef[p] / (2 * p + 1) + s * dcoef[p + 1] / (2 * p + 3)) ** 2
                trace_rhs = 2 * abs(dcoef[p]) / (2 * p + 1)
                out[(p, sign)] = IdentityResidual(
                    float(abs(lhs - rhs)), float(_rel(lhs, rhs)),
                    float(abs(trace_lhs - trace_rhs)), float(_rel(trace_lhs, trace_rhs)))
    return out


# -- rates ---------------------------------------------------------------------

@dataclass(frozen=True)
class ProjectionRate:
    shape: str
    alpha: float
    proj: str
    p: tuple[int, ...]
    l2_errors: tuple[float, ...]
    trace_errors: tuple[float, ...]
    slope: float
    trace_slope: float | None
    predicted: float | None
    predicted_trace: float | None


def loglog_slope(p: Sequence[float], err: Sequence[float]) -> float:
    """Negated OLS slope of log(err) against log(p)."""
    lp, le = np.log(np.asarray(p, float)), np.log(np.asarray(err, float))
    return -float(np.polyfit(lp, le, 1)[0])


def _check_not_degenerate(err: Sequence[float]):
    err = np.asarray(err, float)
    if np.any(err <= 0) or np.any(err[1:] > err[:-1] / 1.01):
        raise DegenerateFit("errors stopped decreasing (quadrature or round-off floor)")


def measure_projection_rate(func: ReferenceFunction, proj: str, p_list: Sequence[int],
                            drop: int = 2) -> ProjectionRate:
    """Projection errors over ``p_list`` and their fitted algebraic rates.

    The ``drop`` smallest degrees are excluded from the fit as pre-asymptotic.
    Trace errors are taken at the endpoint the projection does not
    interpolate (both ends, maximised, for the L2 projection).
    """
    p_list = sorted(int(p) for p in p_list)
    if len(p_list) - drop < 2:
        raise ValueError("need at least two degrees after dropping the pre-asymptotic ones")
    l2s, traces = [], []
    for p in p_list:
        quad = reference_rule(p, func.singular_points)
        c = project(func, p, quad, proj)
        e = projection_errors(func, c, quad)
        l2s.append(e.l2_error)
        traces.append({"minus": e.left_trace_error, "plus": e.right_trace_error}.get(
            proj, max(e.left_trace_error, e.right_trace_error)))
    fit_p = p_list[drop:]
    _check_not_degenerate(l2s[drop:])
    slope = loglog_slope(fit_p, l2s[drop:])
    try:
        _check_not_degenerate(traces[drop:])
        trace_slope = loglog_slope(fit_p, traces[drop:])
    except DegenerateFit:
        trace_slope = None
    return ProjectionRate(func.shape, func.alpha, proj, tuple(p_list), tuple(l2s), tuple(traces),
                          slope, trace_slope,
                          predicted_projection_rate(func.shape, func.alpha, proj, "l2"),
                          predicted_projection_rate(func.shape, func.alpha, proj, "trace"))
