"""One-dimensional meshes, affine element maps and broken polynomial fields."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .exceptions import OutOfDomain
from .legendre import (QuadratureRule, composite_rule, graded_breaks, legendre_coeffs,
                       legendre_vandermonde)


class ProjectionVariant(enum.Enum):
    L2 = "l2"
    RADAU_MINUS = "minus"
    RADAU_PLUS = "plus"


class Side(enum.Enum):
    LEFT_LIMIT = "left"
    RIGHT_LIMIT = "right"
    INTERIOR = "interior"


@dataclass(frozen=True)
class ElementMap:
    """Affine map between (-1, 1) and the element [left, right]."""

    index: int
    left: float
    right: float

    @property
    def h(self) -> float:
        return self.right - self.left

    def to_physical(self, xi):
        return self.left + 0.5 * self.h * (1.0 + np.asarray(xi, dtype=float))

    def to_reference(self, x):
        return 2.0 * (np.asarray(x, dtype=float) - self.left) / self.h - 1.0

    def pull_back(self, fn: Callable) -> Callable:
        """``fn`` (a function of x) as a function of xi."""
        return lambda xi: fn(self.to_physical(xi))


@dataclass(frozen=True)
class Mesh1D:
    nodes: np.ndarray
    degrees: tuple[int, ...]

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ValueError("a mesh needs at least two nodes")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("mesh nodes must be strictly increasing")
        degrees = tuple(int(p) for p in self.degrees)
        if len(degrees) != nodes.size - 1:
            raise ValueError(f"expected {nodes.size - 1} degrees, got {len(degrees)}")
        if min(degrees) < 1:
            raise ValueError("every element degree must be at least 1")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "degrees", degrees)

    @classmethod
    def uniform(cls, a: float, b: float, n_elements: int, p: int) -> "Mesh1D":
        if n_elements < 1:
            raise ValueError("need at least one element")
        return cls(np.linspace(a, b, n_elements + 1), (p,) * n_elements)

    def __eq__(self, other):
        return (isinstance(other, Mesh1D) and self.degrees == other.degrees
                and np.array_equal(self.nodes, other.nodes))

    def __hash__(self):
        return hash((self.nodes.tobytes(), self.degrees))

    @property
    def n_elements(self) -> int:
        return len(self.degrees)

    @property
    def a(self) -> float:
        return float(self.nodes[0])

    @property
    def b(self) -> float:
        return float(self.nodes[-1])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def h(self) -> float:
        return float(self.widths.max())

    @property
    def h_min(self) -> float:
        return float(self.widths.min())

    @property
    def p(self) -> int:
        return min(self.degrees)

    @property
    def p_max(self) -> int:
        return max(self.degrees)

    @cached_property
    def offsets(self) -> np.ndarray:
        return np.concatenate(([0], np.cumsum([p + 1 for p in self.degrees])))

    @property
    def ndof(self) -> int:
        return int(self.offsets[-1])

    def element(self, j: int) -> ElementMap:
        return ElementMap(j, float(self.nodes[j]), float(self.nodes[j + 1]))

    def elements(self):
        return [self.element(j) for j in range(self.n_elements)]

    def locate(self, x: float, side: Side | str = Side.INTERIOR) -> int:
        """Index of the element owning ``x``; at nodes ``side`` decides."""
        side = Side(side)
        x = float(x)
        if not self.a <= x <= self.b:
            raise OutOfDomain(f"x={x} outside [{self.a}, {self.b}]")
        hits = np.flatnonzero(self.nodes == x)
        if hits.size:
            k = int(hits[0])
            if side is Side.INTERIOR:
                raise ValueError(f"x={x} is a mesh node; give a left or right limit")
            if side is Side.LEFT_LIMIT:
                if k == 0:
                    raise OutOfDomain("no left limit at the left boundary")
                return k - 1
            if k == self.n_elements:
                raise OutOfDomain("no right limit at the right boundary")
            return k
        return int(np.searchsorted(self.nodes, x) - 1)

    def with_degree(self, p: int) -> "Mesh1D":
        return Mesh1D(self.nodes, (p,) * self.n_elements)

    def element_rule(self, j: int, singular: Sequence[float] = (),
                     points: int | None = None) -> QuadratureRule:
        """Reference-element rule for element j.

        Elements containing or touching a point of ``singular`` get a
        composite rule graded toward it; others a plain Gauss rule with
        2(p_j + 8) points.
        """
        return composite_rule(*self.element_breaks(j, singular, points))

    def element_breaks(self, j: int, singular: Sequence[float] = (),
                       points: int | None = None) -> tuple[np.ndarray, int]:
        p = self.degrees[j]
        em = self.element(j)
        tol = 1e-14 * max(1.0, abs(em.left), abs(em.right))
        local = [float(np.clip(em.to_reference(s), -1.0, 1.0)) for s in singular
                 if em.left - tol <= s <= em.right + tol]
        if not local:
            return np.array([-1.0, 1.0]), points or 2 * (p + 8)
        n = points or max(20, p + 12)
        return graded_breaks(-1.0, 1.0, local, n), n


@dataclass(eq=False)
class BrokenField:
    """Modal Legendre coefficients of a piecewise polynomial, stored flat."""

    mesh: Mesh1D
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.array(self.coeffs, dtype=float).reshape(-1)
        if self.coeffs.size != self.mesh.ndof:
            raise ValueError(f"expected {self.mesh.ndof} coefficients, got {self.coeffs.size}")

    @classmethod
    def zeros(cls, mesh: Mesh1D) -> "BrokenField":
        return cls(mesh, np.zeros(mesh.ndof))

    @classmethod
    def from_elements(cls, mesh: Mesh1D, blocks: Sequence) -> "BrokenField":
        return cls(mesh, np.concatenate([np.asarray(b, dtype=float) for b in blocks]))

    def element(self, j: int) -> np.ndarray:
        """Writable view of the coefficients on element j."""
        o = self.mesh.offsets
        return self.coeffs[o[j]:o[j + 1]]

    def blocks(self) -> list[np.ndarray]:
        return [self.element(j) for j in range(self.mesh.n_elements)]

    def copy(self) -> "BrokenField":
        return BrokenField(self.mesh, self.coeffs.copy())

    def _check(self, other: "BrokenField"):
        if other.mesh != self.mesh:
            raise ValueError("fields live on different meshes")

    def __add__(self, other):
        self._check(other)
        return BrokenField(self.mesh, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return BrokenField(self.mesh, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float):
        return BrokenField(self.mesh, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return BrokenField(self.mesh, -self.coeffs)

    def l2_norm(self) -> float:
        """Exact L2 norm using the diagonal Legendre mass matrix."""
        total = 0.0
        for j, c in enumerate(self.blocks()):
            n = np.arange(c.size)
            total += self.mesh.widths[j] * float(np.sum(c * c / (2 * n + 1)))
        return float(np.sqrt(total))

    def traces(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-element values at xi = -1 (right limits at x_{j-1}) and xi = 1."""
        lefts = np.array([np.dot((-1.0) ** np.arange(c.size), c) for c in self.blocks()])
        rights = np.array([c.sum() for c in self.blocks()])
        return lefts, rights

    def values_on(self, j: int, xi) -> np.ndarray:
        return legendre_vandermonde(self.mesh.degrees[j], xi) @ self.element(j)


def eval_field(field: BrokenField, x: float, side: Side | str = Side.INTERIOR) -> float:
    """Value of the broken field at x; mesh nodes need an explicit one-sided limit."""
    j = field.mesh.locate(x, side)
    xi = field.mesh.element(j).to_reference(x)
    return float(field.values_on(j, np.array([float(xi)]))[0])


def project_function(fn: Callable, mesh: Mesh1D,
                     variant: ProjectionVariant | str = ProjectionVariant.L2,
                     singular: Sequence[float] = ()) -> BrokenField:
    """Elementwise projection of a function of x onto the broken space."""
    variant = ProjectionVariant(variant)
    blocks = []
    for j, em in enumerate(mesh.elements()):
        p = mesh.degrees[j]
        quad = mesh.element_rule(j, singular, points=None)
        c = legendre_coeffs(em.pull_back(fn), p, quad)
        if variant is ProjectionVariant.RADAU_MINUS:
            c[p] = float(fn(np.array([em.right]))[0]) - c[:p].sum()
        elif variant is ProjectionVariant.RADAU_PLUS:
            signs = (-1.0) ** np.arange(p)
            c[p] = (-1.0) ** p * (float(fn(np.array([em.left]))[0]) - np.dot(signs, c[:p]))
        blocks.append(c)
    return BrokenField.from_elements(mesh, blocks)


def project_exact(s, mesh: Mesh1D, t: float,
                  variant: ProjectionVariant | str = ProjectionVariant.L2) -> BrokenField:
    """Elementwise projection of the manufactured solution ``s`` at time t."""
    return project_function(lambda x: s.u(x, t), mesh, variant, s.singular_points)
