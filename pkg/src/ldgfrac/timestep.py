"""Third-order TVD Runge-Kutta time stepping for the LDG semi-discretisation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .exceptions import NonFinite
from .ldg import LdgOperator, LdgProblem
from .mesh import BrokenField

DEFAULT_CFL = 0.5


def stable_dt(c: float, d: float, p: int, h_min: float, cfl: float = DEFAULT_CFL) -> float:
    """cfl / (c p^2 / h_min + d p^4 / h_min^2)."""
    return cfl / (c * p**2 / h_min + d * p**4 / h_min**2)


@dataclass(frozen=True)
class TimeStepPlan:
    """``n_steps`` equal steps of size ``dt``; n_steps * dt is the final time."""

    dt: float
    n_steps: int
    cfl: float = DEFAULT_CFL

    def __post_init__(self):
        if not self.dt > 0 or self.n_steps < 1:
            raise ValueError("need dt > 0 and at least one step")
        if not 0 < self.cfl <= 1:
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")

    @property
    def T(self) -> float:
        return self.dt * self.n_steps

    @classmethod
    def for_problem(cls, prob: LdgProblem, cfl: float = DEFAULT_CFL) -> "TimeStepPlan":
        mesh = prob.mesh
        dt_max = stable_dt(prob.c, prob.d, mesh.p_max, mesh.h_min, cfl)
        # equal steps no larger than the bound, landing exactly on T
        n = max(1, math.ceil(prob.T / dt_max * (1 - 1e-12)))
        return cls(prob.T / n, n, cfl)

    def halved(self) -> "TimeStepPlan":
        return TimeStepPlan(self.dt / 2, 2 * self.n_steps, self.cfl)


def _coeffs(u):
    return u.coeffs if isinstance(u, BrokenField) else np.asarray(u)


def tvd_rk3_step(u, t: float, dt: float, L: Callable):
    """One Shu-Osher step; ``u`` may be a BrokenField or an array."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    u1 = u + dt * L(u, t)
    u2 = 0.75 * u + 0.25 * (u1 + dt * L(u1, t + dt))
    out = (1.0 / 3.0) * u + (2.0 / 3.0) * (u2 + dt * L(u2, t + 0.5 * dt))
    if not np.all(np.isfinite(_coeffs(out))):
        raise NonFinite("non-finite coefficients after an RK3 step")
    return out


@dataclass
class Propagator:
    """Exact one-step map of TVD-RK3 for an affine operator.

    With E = I + dt A one step reads
    U <- R U + w(t) V0 + w(t + dt) V1 + w(t + dt/2) V2.
    """

    R: np.ndarray
    V0: np.ndarray
    V1: np.ndarray
    V2: np.ndarray
    weights: tuple
    dt: float

    @classmethod
    def build(cls, form, dt: float) -> "Propagator":
        n = form.A.shape[0]
        E = np.eye(n) + dt * form.A
        E2 = E @ E
        R = np.eye(n) / 3.0 + (2.0 / 3.0) * E @ (0.75 * np.eye(n) + 0.25 * E2)
        B = form.B.T  # columns are the data vectors
        return cls(R, dt / 6.0 * (E2 @ B), dt / 6.0 * (E @ B), 2.0 * dt / 3.0 * B,
                   form.weights, dt)

    def _w(self, t):
        return np.array([w(t) for w in self.weights])

    def step(self, U, t: float) -> np.ndarray:
        dt = self.dt
        return (self.R @ U + self.V0 @ self._w(t) + self.V1 @ self._w(t + dt)
                + self.V2 @ self._w(t + 0.5 * dt))

    def spectral_radius(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvals(self.R))))


@dataclass
class IntegrationResult:
    u: BrokenField
    plan: TimeStepPlan
    q_times: np.ndarray = field(default_factory=lambda: np.empty(0))
    q_snapshots: list = field(default_factory=list)


def _snapshot_steps(n_steps: int, count: int) -> np.ndarray:
    if count <= 0:
        return np.empty(0, dtype=int)
    count = min(count, n_steps)
    return np.unique(np.round(np.linspace(0, n_steps, count + 1)).astype(int))


def integrate(prob: LdgProblem, plan: TimeStepPlan | None = None, q_snapshots: int = 0,
              fast: bool | None = None) -> IntegrationResult:
    """Advance the projected initial data to ``plan.T``.

    ``q_snapshots`` > 0 records q_h at that many uniform intervals (plus
    t = 0). ``fast`` selects the precomputed propagator; by default it is
    used whenever the problem data are separable.
    """
    plan = plan or TimeStepPlan.for_problem(prob)
    op = LdgOperator(prob)
    u0 = op.project_initial()
    snap_at = set(_snapshot_steps(plan.n_steps, q_snapshots).tolist())
    times, snaps = [], []
    use_fast = prob.terms is not None if fast is None else fast
    dt = plan.dt
    if use_fast:
        form = op.affine_form()
        prop = Propagator.build(form, dt)
        U = u0.coeffs.copy()
        for k in range(plan.n_steps + 1):
            t = k * dt
            if k in snap_at:
                times.append(t)
                snaps.append(BrokenField(prob.mesh, form.q(U, t)))
            if k == plan.n_steps:
                break
            U = prop.step(U, t)
            if not np.all(np.isfinite(U)):
                raise NonFinite(f"non-finite coefficients at step {k + 1}", step=k + 1)
        u = BrokenField(prob.mesh, U)
    else:
        u = u0
        for k in range(plan.n_steps + 1):
            t = k * dt
            if k in snap_at:
                times.append(t)
                snaps.append(op.recover_q(u, t))
            if k == plan.n_steps:
                break
            try:
                u = tvd_rk3_step(u, t, dt, op.rhs)
            except NonFinite as exc:
                raise NonFinite(f"{exc} at step {k + 1}", step=k + 1) from exc
    return IntegrationResult(u, plan, np.array(times), snaps)


@dataclass(frozen=True)
class AuditResult:
    error: float
    error_halved: float
    relative_change: float
    passed: bool


def halving_audit(run: Callable[[TimeStepPlan], float], plan: TimeStepPlan,
                  tolerance: float = 0.01) -> AuditResult:
    """Compare an error measure at dt and dt/2; pass when it moves by < tolerance."""
    e1 = run(plan)
    e2 = run(plan.halved())
    rel = abs(e1 - e2) / max(abs(e2), np.finfo(float).tiny)
    return AuditResult(e1, e2, rel, rel < tolerance)
