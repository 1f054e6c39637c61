"""Legendre polynomials, Gauss quadrature and expansion coefficients on (-1, 1).

Everything here works on the reference interval. Composite rules graded
toward a point are provided for integrands with algebraic endpoint or
interior singularities, where a single Gauss rule converges too slowly to
resolve small projection errors.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np


def eval_legendre(n: int, x):
    """Evaluate L_n at ``x`` (scalar or array) with the three-term recurrence."""
    if n < 0:
        raise ValueError(f"degree must be non-negative, got {n}")
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    if n == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    p = x.copy()
    for k in range(1, n):
        p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
    return p if p.ndim else float(p)


def eval_legendre_deriv(n: int, x):
    """Evaluate L_n' at ``x`` via L_{k+1}' = L_{k-1}' + (2k+1) L_k."""
    if n < 0:
        raise ValueError(f"degree must be non-negative, got {n}")
    x = np.asarray(x, dtype=float)
    if n == 0:
        out = np.zeros_like(x)
        return out if out.ndim else 0.0
    vals = legendre_vandermonde(n, x.reshape(-1))
    d_prev = np.zeros(vals.shape[0])
    d = np.ones(vals.shape[0])
    for k in range(1, n):
        d_prev, d = d, d_prev + (2 * k + 1) * vals[:, k]
    out = d.reshape(x.shape)
    return out if out.ndim else float(out)


def legendre_vandermonde(p: int, x) -> np.ndarray:
    """Matrix ``V[i, n] = L_n(x_i)`` for n = 0..p."""
    x = np.asarray(x, dtype=float).reshape(-1)
    V = np.empty((x.size, p + 1))
    V[:, 0] = 1.0
    if p >= 1:
        V[:, 1] = x
    for k in range(1, p):
        V[:, k + 1] = ((2 * k + 1) * x * V[:, k] - k * V[:, k - 1]) / (k + 1)
    return V


def legendre_series(coeffs, x):
    """Evaluate sum_n coeffs[n] L_n(x)."""
    coeffs = np.asarray(coeffs, dtype=float)
    x = np.asarray(x, dtype=float)
    out = legendre_vandermonde(len(coeffs) - 1, x) @ coeffs
    return out.reshape(x.shape) if x.ndim else float(out[0])


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and positive weights of an interpolatory rule."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.shape != weights.shape or nodes.ndim != 1:
            raise ValueError("nodes and weights must be 1-D arrays of equal length")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return self.nodes.size

    def integrate(self, f: Callable) -> float:
        return float(np.dot(self.weights, f(self.nodes)))

    def mapped(self, a: float, b: float) -> "QuadratureRule":
        """The same rule transplanted affinely from (-1, 1) to (a, b)."""
        half = 0.5 * (b - a)
        return QuadratureRule(a + half * (1.0 + self.nodes), half * self.weights)


@lru_cache(maxsize=None)
def _gauss_nodes_weights(q: int) -> tuple[np.ndarray, np.ndarray]:
    # Newton on L_q, started from the Chebyshev-like asymptotic guess.
    k = np.arange(1, q + 1)
    x = -np.cos((4 * k - 1) * np.pi / (4 * q + 2))
    for _ in range(100):
        V = legendre_vandermonde(q, x)
        dlq = q * (V[:, q - 1] - x * V[:, q]) / (1.0 - x * x)
        step = V[:, q] / dlq
        x = x - step
        if np.max(np.abs(step)) < 1e-16:
            break
    V = legendre_vandermonde(q, x)
    dlq = q * (V[:, q - 1] - x * V[:, q]) / (1.0 - x * x)
    w = 2.0 / ((1.0 - x * x) * dlq * dlq)
    # symmetrize to kill the last ulp of asymmetry
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return x, w


def gauss_legendre_rule(q: int) -> QuadratureRule:
    """q-point Gauss-Legendre rule on (-1, 1), exact for degree 2q - 1."""
    if q < 1:
        raise ValueError(f"need at least one point, got {q}")
    if q == 1:
        return QuadratureRule(np.array([0.0]), np.array([2.0]))
    x, w = _gauss_nodes_weights(q)
    return QuadratureRule(x.copy(), w.copy())


def graded_panels(a: float, b: float, point: float, levels: int = 60,
                  ratio: float = 0.5, min_width: float = 0.0) -> np.ndarray:
    """Panel breakpoints on [a, b] refined geometrically toward ``point``.

    ``point`` may be an endpoint or lie inside; interior points are graded
    from both sides. Refinement stops after ``levels`` halvings or once a
    panel would shrink below ``min_width``.
    """
    if not a < b:
        raise ValueError("need a < b")
    if not a <= point <= b:
        raise ValueError(f"grading point {point} outside [{a}, {b}]")
    def side(length):
        scales = ratio ** np.arange(1, levels + 1)
        scales = scales[length * scales >= min_width]
        return np.concatenate((scales[::-1], [1.0])) * length

    pieces = []
    if point > a:
        pieces.append(point - side(point - a)[::-1])
    pieces.append(np.array([point]))
    if point < b:
        pieces.append(point + side(b - point))
    return np.concatenate(pieces)


def composite_rule(breaks: Sequence[float], points: int) -> QuadratureRule:
    """Gauss rule with ``points`` nodes on every panel [breaks[i], breaks[i+1]]."""
    breaks = np.asarray(breaks, dtype=float)
    base = gauss_legendre_rule(points)
    lo, hi = breaks[:-1, None], breaks[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + half * (1.0 + base.nodes)).ravel()
    weights = (half * base.weights).ravel()
    return QuadratureRule(nodes, weights)


def graded_breaks(a: float = -1.0, b: float = 1.0, points_at: Sequence[float] = (),
                  points: int = 20, levels: int = 60, ratio: float = 0.5) -> np.ndarray:
    """Panel breakpoints on [a, b] graded toward every point in ``points_at``.

    ``points`` is the per-panel Gauss order the panels are meant for; it
    sets how close to a singular point the smallest panel may get.
    Points outside [a, b] are ignored.
    """
    inside = sorted({float(s) for s in points_at if a <= s <= b})
    if not inside:
        return np.array([a, b], dtype=float)
    # Keep the node nearest a singular point at least 16 ulps away from it.
    offset = 0.5 * (1.0 + gauss_legendre_rule(points).nodes[0])
    # split at midpoints between singular points so each piece has one
    cuts = [a] + [0.5 * (s + t) for s, t in zip(inside[:-1], inside[1:])] + [b]
    breaks = []
    for lo, hi, s in zip(cuts[:-1], cuts[1:], inside):
        min_width = 16.0 * np.spacing(abs(s)) / offset
        seg = graded_panels(lo, hi, s, levels=levels, ratio=ratio, min_width=min_width)
        breaks.append(seg if not breaks else seg[1:])
    return np.concatenate(breaks)


def refine_breaks(breaks) -> np.ndarray:
    """Split every panel in two."""
    breaks = np.asarray(breaks, dtype=float)
    mids = 0.5 * (breaks[:-1] + breaks[1:])
    out = np.empty(2 * breaks.size - 1)
    out[0::2], out[1::2] = breaks, mids
    return out


def graded_rule(a: float = -1.0, b: float = 1.0, points_at: Sequence[float] = (),
                points: int = 20, levels: int = 60, ratio: float = 0.5) -> QuadratureRule:
    """Composite Gauss rule on (a, b), graded toward every point in ``points_at``.

    With no singular points inside [a, b] this is a single ``points``-node
    Gauss rule.
    """
    return composite_rule(graded_breaks(a, b, points_at, points, levels, ratio), points)


def legendre_coeffs(f: Callable, p: int, quad: QuadratureRule) -> np.ndarray:
    """Expansion coefficients (2n+1)/2 * int f L_n for n = 0..p."""
    V = legendre_vandermonde(p, quad.nodes)
    fw = quad.weights * f(quad.nodes)
    return (2.0 * np.arange(p + 1) + 1.0) / 2.0 * (fw @ V)


def derivative_coeffs(coeffs) -> np.ndarray:
    """Legendre coefficients of the derivative of a finite Legendre series."""
    c = np.asarray(coeffs, dtype=float)
    p = len(c) - 1
    out = np.zeros(max(p, 1))
    # L_n' = sum_{k < n, n-k odd} (2k+1) L_k
    running = [0.0, 0.0]
    for n in range(p, 0, -1):
        running[n % 2] += c[n]
        out[n - 1] = (2 * (n - 1) + 1) * running[n % 2]
    return out
