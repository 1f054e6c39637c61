"""Error norms against exact solutions, log-log order fitting and predicted rates."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import DegenerateFit, InvalidForHyperbolic
from .fracfun import SingularSolution, SolutionKind, exact_q
from .legendre import composite_rule, legendre_vandermonde, refine_breaks
from .mesh import BrokenField, Mesh1D

HEAVISIDE_NOTE = (
    "text accompanying the Heaviside experiment quotes the same exponent for d=0 and d!=0; "
    "the predicted slope here follows the endpoint theorem with (alpha, m) = (pi, 1), "
    "i.e. pi+1/2 for d=0 and pi-1/2 for d!=0"
)


class SingularityCase(enum.Enum):
    LEFT_ENDPOINT = "left-endpoint"
    FITTED_INTERIOR = "fitted-interior"
    UNFITTED_INTERIOR = "unfitted-interior"


def predicted_order(case: SingularityCase | str, alpha: float, m: float = math.inf,
                    diffusive: bool = False) -> float:
    """Predicted p-rate of the dominant singular term."""
    case = SingularityCase(case)
    if case is SingularityCase.UNFITTED_INTERIOR:
        return alpha - 0.5 if diffusive else alpha + 0.5
    if diffusive:
        return min(2 * alpha - 1.5, alpha + m - 1.5)
    if case is SingularityCase.LEFT_ENDPOINT:
        return min(2 * alpha + 1, alpha + m - 0.5)
    return min(2 * alpha + 0.5, alpha + m - 0.5)


def classify(s: SingularSolution, mesh: Mesh1D) -> SingularityCase | None:
    """Which row of the rate table applies to ``s`` on ``mesh``."""
    if s.kind is SolutionKind.SMOOTH:
        return None
    if s.kind is SolutionKind.ABS_POWER_INTERIOR:
        on_node = np.any(np.isclose(mesh.nodes, s.theta, rtol=0, atol=1e-14))
        if s.theta <= mesh.a or s.theta >= mesh.b:
            return SingularityCase.LEFT_ENDPOINT
        return SingularityCase.FITTED_INTERIOR if on_node else SingularityCase.UNFITTED_INTERIOR
    return SingularityCase.LEFT_ENDPOINT


def predicted_for(s: SingularSolution, mesh: Mesh1D, d: float) -> float | None:
    case = classify(s, mesh)
    if case is None:
        return None
    return predicted_order(case, s.alpha, s.m, diffusive=d > 0)


# -- norms -----------------------------------------------------------------------

def _element_sq_error(u_h: BrokenField, fn, j: int, breaks, points: int) -> float:
    mesh = u_h.mesh
    em = mesh.element(j)
    rule = composite_rule(breaks, points)
    V = legendre_vandermonde(mesh.degrees[j], rule.nodes)
    diff = V @ u_h.element(j) - fn(em.to_physical(rule.nodes))
    return 0.5 * em.h * float(np.dot(rule.weights, diff * diff))


def l2_error(u_h: BrokenField, fn, singular: Sequence[float] = (), rtol: float = 1e-3,
             max_refinements: int = 6) -> float:
    """sqrt(sum_j int_{I_j} (u_h - fn)^2), panels doubled until the value settles."""
    mesh = u_h.mesh
    setup = [mesh.element_breaks(j, singular) for j in range(mesh.n_elements)]
    breaks = [b for b, _ in setup]
    points = [n for _, n in setup]

    def total(brs):
        return math.sqrt(sum(_element_sq_error(u_h, fn, j, b, n)
                             for j, (b, n) in enumerate(zip(brs, points))))

    err = total(breaks)
    for _ in range(max_refinements):
        breaks = [refine_breaks(b) for b in breaks]
        new = total(breaks)
        settled = abs(new - err) <= rtol * max(new, 1e-300)
        err = new
        if settled:
            break
    return err


def l2_error_at_T(u_h: BrokenField, s: SingularSolution, mesh: Mesh1D, T: float) -> float:
    if u_h.mesh != mesh:
        raise ValueError("field and mesh disagree")
    return l2_error(u_h, lambda x: s.u(x, T), s.singular_points)


def q_error_QT(times: Sequence[float], snapshots: Sequence[BrokenField], s: SingularSolution,
               d: float, mesh: Mesh1D) -> float:
    """Space-time L2 error of q: trapezoid rule in time over the snapshots."""
    if d == 0:
        raise InvalidForHyperbolic("the auxiliary variable vanishes when d = 0")
    times = np.asarray(times, dtype=float)
    if times.size != len(snapshots) or times.size < 2:
        raise ValueError("need at least two snapshots with matching times")
    sq = [l2_error(q, lambda x, t=t: exact_q(s, d, x, t), s.singular_points) ** 2
          for t, q in zip(times, snapshots)]
    return math.sqrt(float(np.trapezoid(sq, times)))


# -- fitting -----------------------------------------------------------------------

@dataclass(frozen=True)
class FitResult:
    slope: float
    dropped: int
    residual: float
    p_used: tuple[int, ...]


def _ols(p, e):
    lp, le = np.log(p), np.log(e)
    coef = np.polyfit(lp, le, 1)
    return -float(coef[0]), float(np.max(np.abs(np.polyval(coef, lp) - le)))


def fit_order(points: Sequence[tuple[float, float]], residual_tol: float = 0.05,
              min_points: int = 3) -> FitResult:
    """Negated log-log OLS slope after dropping the pre-asymptotic prefix.

    Leading points are discarded until the largest log residual of the fit
    is below ``residual_tol`` (keeping at least ``min_points``).
    """
    pts = sorted((float(p), float(e)) for p, e in points)
    if len(pts) < min_points:
        raise ValueError(f"need at least {min_points} points, got {len(pts)}")
    p = np.array([q for q, _ in pts])
    e = np.array([x for _, x in pts])
    if np.any(~np.isfinite(e)) or np.any(e <= 0):
        raise DegenerateFit("errors must be positive and finite")
    best = None
    for drop in range(len(p) - min_points + 1):
        slope, resid = _ols(p[drop:], e[drop:])
        best = (slope, drop, resid)
        if resid < residual_tol:
            break
    slope, drop, resid = best
    tail = e[drop:]
    if np.any(tail[1:] > tail[:-1] / 1.01):
        raise DegenerateFit("errors stopped decreasing (consecutive ratio below 1.01)")
    return FitResult(slope, drop, resid, tuple(int(q) for q in p[drop:]))


# -- reports -----------------------------------------------------------------------

@dataclass(frozen=True)
class ConvergencePoint:
    """One sweep point. Projection studies store the L2 error in ``error_u``."""

    p: int
    error_u: float
    error_q: float | None = None
    dt_used: float | None = None
    audit_pass: bool | None = None
    trace_error: float | None = None


@dataclass(frozen=True)
class ConvergenceReport:
    """Fitted against predicted slope for one experiment.

    ``secondary_slope`` carries a second measured rate: the combined u + q
    error for diffusive solver runs, the trace error for projection studies.
    It enters the verdict only when ``secondary_predicted`` is set.
    ``exact`` marks sweeps whose errors all sit at the round-off floor.
    """

    experiment: str
    points: tuple[ConvergencePoint, ...]
    fitted_slope: float
    predicted_slope: float | None
    tolerance: float
    dropped: int = 0
    notes: tuple[str, ...] = ()
    secondary_label: str = ""
    secondary_slope: float | None = None
    secondary_predicted: float | None = None
    exact: bool = False

    def __post_init__(self):
        if any(not pt.error_u > 0 for pt in self.points) and not self.exact:
            raise ValueError("errors must be strictly positive")
        if len(self.points) - self.dropped < 3 and not self.exact:
            raise ValueError("a fit needs at least three points")

    @property
    def margin(self) -> float:
        if self.predicted_slope is None or self.exact:
            return math.nan
        return abs(self.fitted_slope - self.predicted_slope)

    @property
    def secondary_margin(self) -> float | None:
        if self.secondary_predicted is None or self.secondary_slope is None:
            return None
        return abs(self.secondary_slope - self.secondary_predicted)

    @property
    def audits_passed(self) -> bool:
        return all(pt.audit_pass is not False for pt in self.points)

    @property
    def passed(self) -> bool:
        if self.exact:
            return True
        ok = self.margin <= self.tolerance and self.audits_passed
        if self.secondary_predicted is not None:
            sm = self.secondary_margin
            ok = ok and sm is not None and sm <= self.tolerance
        return ok

    def summary(self) -> str:
        def fmt(x):
            return "nan" if x is None or (isinstance(x, float) and math.isnan(x)) else f"{x:.4f}"
        parts = [f"experiment={self.experiment}"]
        if self.exact:
            parts.append("fitted_slope=exact")
        else:
            parts += [f"fitted_slope={fmt(self.fitted_slope)}",
                      f"predicted_slope={fmt(self.predicted_slope)}",
                      f"margin={fmt(self.margin)}", f"dropped={self.dropped}"]
        if self.secondary_label:
            parts.append(f"{self.secondary_label}_slope={fmt(self.secondary_slope)}")
            if self.secondary_predicted is not None:
                parts.append(f"{self.secondary_label}_predicted={fmt(self.secondary_predicted)}")
        parts.append(f"tolerance={self.tolerance}")
        parts.append("passed=" + ("PASS-exact" if self.exact else str(self.passed)))
        parts += [f"note={n}" for n in self.notes]
        return "; ".join(parts)
