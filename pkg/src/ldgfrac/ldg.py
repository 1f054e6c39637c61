"""Semi-discrete LDG operator for u_t + (c u - d u_x)_x = f on a 1D mesh.

The auxiliary variable is q = sqrt(d) u_x. Fluxes: u is taken from the
left (upwind), q from the right, with the inflow value g_a at x = a and the
penalised outflow value at x = b.  All element matrices are diagonal or
closed-form in the modal Legendre basis, so the operator involves no
quadrature apart from the forcing inner products.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable, Sequence

import numpy as np

from .legendre import legendre_vandermonde
from .mesh import BrokenField, Mesh1D, ProjectionVariant, project_function


@lru_cache(maxsize=None)
def stiffness(p: int) -> np.ndarray:
    """S[m, n] = int_{-1}^{1} L_m L_n' = 2 when n > m and n + m is odd."""
    m, n = np.meshgrid(np.arange(p + 1), np.arange(p + 1), indexing="ij")
    S = np.where((n > m) & ((n + m) % 2 == 1), 2.0, 0.0)
    S.setflags(write=False)
    return S


@dataclass(frozen=True)
class DataTerm:
    """One separable piece of the data: weight(t) * (forcing(x), g_a, g_b)."""

    weight: Callable[[float], float]
    forcing: Callable | None = None
    g_a: float = 0.0
    g_b: float = 0.0


@dataclass(frozen=True)
class LdgProblem:
    """Convection-diffusion problem with Dirichlet data.

    ``f(x, t)``, ``g_a(t)``, ``g_b(t)`` and ``u_ic(x)`` describe the data
    pointwise. When ``terms`` is given it must describe the same data as a
    sum of separable pieces; the time integrator then uses a precomputed
    propagator instead of re-assembling the operator at every stage.
    """

    c: float
    d: float
    T: float
    mesh: Mesh1D
    g_a: Callable[[float], float]
    g_b: Callable[[float], float]
    u_ic: Callable
    f: Callable
    singular: tuple[float, ...] = ()
    terms: tuple[DataTerm, ...] | None = None

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"convection speed must be positive, got {self.c}")
        if not self.d >= 0:
            raise ValueError(f"diffusion must be non-negative, got {self.d}")
        if not self.T > 0:
            raise ValueError(f"final time must be positive, got {self.T}")

    @classmethod
    def from_solution(cls, s, c: float, d: float, T: float, mesh: Mesh1D) -> "LdgProblem":
        """Problem whose exact solution is the manufactured solution ``s``."""
        a, b = mesh.a, mesh.b
        Xa = float(s.profile(np.array([a]))[0])
        Xb = float(s.profile(np.array([b]))[0])
        terms = (
            DataTerm(s.time_factor, lambda x: s.transport_profile(c, d, x), Xa, Xb),
            DataTerm(s.time_factor_deriv, lambda x: s.profile(x)),
        )
        return cls(
            c=c, d=d, T=T, mesh=mesh,
            g_a=lambda t: s.time_factor(t) * Xa,
            g_b=lambda t: s.time_factor(t) * Xb,
            u_ic=lambda x: s.u(x, 0.0),
            f=lambda x, t: s.time_factor_deriv(t) * s.profile(x)
            + s.time_factor(t) * s.transport_profile(c, d, x),
            singular=tuple(s.singular_points),
            terms=terms,
        )

    def with_mesh(self, mesh: Mesh1D) -> "LdgProblem":
        return LdgProblem(self.c, self.d, self.T, mesh, self.g_a, self.g_b, self.u_ic,
                          self.f, self.singular, self.terms)

    @property
    def c11(self) -> float:
        return penalty(self.c, self.d, self.mesh.degrees[-1], float(self.mesh.widths[-1]))


def penalty(c: float, d: float, p_last: int, h_last: float) -> float:
    """Outflow penalty max{c/2, max{1, p_M} d / h_M}."""
    return max(c / 2.0, max(1, p_last) * d / h_last)


class LdgOperator:
    """Assembles q-recovery and du/dt for a fixed problem and mesh."""

    def __init__(self, prob: LdgProblem):
        self.prob = prob
        self.mesh = prob.mesh
        self.sqrt_d = math.sqrt(prob.d)
        mesh = self.mesh
        self._slices = [slice(mesh.offsets[j], mesh.offsets[j + 1])
                        for j in range(mesh.n_elements)]
        self._modes = [np.arange(p + 1) for p in mesh.degrees]
        self._alt = [(-1.0) ** n for n in self._modes]
        # (2n+1)/h_j: inverse of the diagonal mass matrix
        self._inv_mass = [(2 * n + 1) / h for n, h in zip(self._modes, mesh.widths)]

    # -- forcing ---------------------------------------------------------------
    @cached_property
    def _element_quadrature(self):
        out = []
        for j, em in enumerate(self.mesh.elements()):
            rule = self.mesh.element_rule(j, self.prob.singular)
            p = self.mesh.degrees[j]
            scaled = legendre_vandermonde(p, rule.nodes) * rule.weights[:, None]
            scaled *= (2 * np.arange(p + 1) + 1) / 2.0
            out.append((em.to_physical(rule.nodes), scaled))
        return out

    def forcing_coeffs(self, fn: Callable) -> np.ndarray:
        """M^{-1} (fn, L_n)_{I_j} on every element, i.e. its L2 projection."""
        return np.concatenate([fn(x) @ V for x, V in self._element_quadrature])

    # -- traces ----------------------------------------------------------------
    def _traces(self, U):
        left = np.array([np.dot(self._alt[j], U[s]) for j, s in enumerate(self._slices)])
        right = np.array([U[s].sum() for s in self._slices])
        return left, right

    def _q(self, U, ga, gb) -> np.ndarray:
        Q = np.zeros_like(U)
        if self.sqrt_d == 0.0:
            return Q
        sd = self.sqrt_d
        _, uR = self._traces(U)
        hq = -sd * np.concatenate(([ga], uR[:-1], [gb]))
        for j, s in enumerate(self._slices):
            p = self.mesh.degrees[j]
            vol = U[s] @ stiffness(p)
            Q[s] = self._inv_mass[j] * (-sd * vol - (hq[j + 1] - self._alt[j] * hq[j]))
        return Q

    def _rhs(self, U, ga, gb, F=None) -> np.ndarray:
        c, d, sd = self.prob.c, self.prob.d, self.sqrt_d
        uL, uR = self._traces(U)
        if d > 0:
            Q = self._q(U, ga, gb)
            qL, qR = self._traces(Q)
        else:
            Q = np.zeros_like(U)
            qL = qR = np.zeros(self.mesh.n_elements)
        hu = np.empty(self.mesh.n_elements + 1)
        hu[0] = c * ga - sd * qL[0]
        hu[1:-1] = c * uR[:-1] - sd * qL[1:]
        if d > 0:
            u_hat = c * uR[-1] - self.prob.c11 * (gb - uR[-1])
        else:
            # pure upwind outflow: no boundary condition is imposed at x = b
            u_hat = c * uR[-1]
        hu[-1] = u_hat - sd * qR[-1]
        out = np.empty_like(U)
        for j, s in enumerate(self._slices):
            p = self.mesh.degrees[j]
            vol = (c * U[s] - sd * Q[s]) @ stiffness(p)
            out[s] = self._inv_mass[j] * (vol - (hu[j + 1] - self._alt[j] * hu[j]))
        if F is not None:
            out += F
        return out

    # -- public operator -------------------------------------------------------
    def recover_q(self, u: BrokenField, t: float) -> BrokenField:
        return BrokenField(self.mesh, self._q(u.coeffs, self.prob.g_a(t), self.prob.g_b(t)))

    def rhs(self, u: BrokenField, t: float) -> BrokenField:
        F = self.forcing_coeffs(lambda x: self.prob.f(x, t))
        return BrokenField(self.mesh, self._rhs(u.coeffs, self.prob.g_a(t), self.prob.g_b(t), F))

    def project_initial(self) -> BrokenField:
        return project_function(self.prob.u_ic, self.mesh, ProjectionVariant.L2,
                                self.prob.singular)

    # -- affine form -----------------------------------------------------------
    def affine_form(self) -> "AffineForm":
        """du/dt = A U + sum_k w_k(t) B_k and q = Qm U + sum_k w_k(t) qB_k.

        Columns are obtained by applying the matrix-free operator to unit
        vectors, so the two forms agree by construction.
        """
        if self.prob.terms is None:
            raise ValueError("problem data is not given in separable form")
        n = self.mesh.ndof
        eye = np.eye(n)
        A = np.column_stack([self._rhs(eye[:, i], 0.0, 0.0) for i in range(n)])
        Qm = np.column_stack([self._q(eye[:, i], 0.0, 0.0) for i in range(n)])
        zero = np.zeros(n)
        B, QB = [], []
        for term in self.prob.terms:
            F = None if term.forcing is None else self.forcing_coeffs(term.forcing)
            B.append(self._rhs(zero, term.g_a, term.g_b, F))
            QB.append(self._q(zero, term.g_a, term.g_b))
        weights = tuple(term.weight for term in self.prob.terms)
        return AffineForm(A, np.array(B), Qm, np.array(QB), weights)


@dataclass(frozen=True)
class AffineForm:
    A: np.ndarray
    B: np.ndarray
    Q: np.ndarray
    QB: np.ndarray
    weights: tuple

    def weight_vector(self, t: float) -> np.ndarray:
        return np.array([w(t) for w in self.weights])

    def rhs(self, U, t: float) -> np.ndarray:
        return self.A @ U + self.weight_vector(t) @ self.B

    def q(self, U, t: float) -> np.ndarray:
        return self.Q @ U + self.weight_vector(t) @ self.QB


def recover_q(u: BrokenField, prob: LdgProblem, t: float) -> BrokenField:
    return LdgOperator(prob).recover_q(u, t)


def rhs(u: BrokenField, prob: LdgProblem, t: float) -> BrokenField:
    return LdgOperator(prob).rhs(u, t)


def project_initial(prob: LdgProblem) -> BrokenField:
    return LdgOperator(prob).project_initial()


def superpose(terms: Sequence[DataTerm], t: float):
    """Pointwise (f, g_a, g_b) represented by separable ``terms`` at time t."""
    ga = sum(term.weight(t) * term.g_a for term in terms)
    gb = sum(term.weight(t) * term.g_b for term in terms)

    def f(x):
        total = np.zeros_like(np.asarray(x, dtype=float))
        for term in terms:
            if term.forcing is not None:
                total = total + term.weight(t) * term.forcing(x)
        return total
    return f, ga, gb
