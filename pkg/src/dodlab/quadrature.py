"""Gauss-Legendre and Gauss-Lobatto-Legendre rules on the reference element [-1, 1].

Nodes are computed by Newton iteration on the Legendre three-term
recurrence, starting from Chebyshev-type initial guesses; this is exact
to machine precision for the moderate degrees used here.  Weights come
from the closed forms

    GL:   w_j = 2 / ((1 - x_j^2) * L'_{p+1}(x_j)^2),
    GLL:  w_j = 2 / (p (p+1) * L_p(x_j)^2),

see e.g. Canuto, Hussaini, Quarteroni, Zang, "Spectral Methods:
Fundamentals in Single Domains", Section 2.3.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

#: Default cap on the polynomial degree; Newton conditioning is safe well past
#: this, but nothing in the package needs more.
MAX_DEGREE = 30

_NEWTON_TOL = 1e-15
_RESIDUAL_TOL = 1e-14


class NodeKind(Enum):
    """Collocation node family of a rule."""

    GAUSS_LEGENDRE = "gl"
    GAUSS_LOBATTO_LEGENDRE = "gll"


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights of a (p+1)-point rule on [-1, 1].

    Nodes are strictly increasing and symmetric about the origin; weights
    are positive, symmetric, and sum to 2.  A GL rule of degree p
    integrates polynomials up to degree 2p+1 exactly, a GLL rule up to
    degree 2p-1.
    """

    kind: NodeKind
    degree: int
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.degree + 1


def _legendre(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate L_n and L_{n-1} via the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    if n == 0:
        return p_prev, np.zeros_like(x)
    p = x.copy()
    for k in range(1, n):
        p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
    return p, p_prev


def _legendre_deriv(n: int, x: np.ndarray) -> np.ndarray:
    """L_n'(x) for |x| < 1, from L_n and L_{n-1}."""
    p, p_prev = _legendre(n, x)
    return n * (x * p - p_prev) / (x * x - 1.0)


def _gauss_legendre(p: int) -> tuple[np.ndarray, np.ndarray]:
    """Roots of L_{p+1} and the matching weights."""
    n = p + 1
    j = np.arange(n)
    # Chebyshev-like initial guess for the ascending roots of L_n.
    x = -np.cos(np.pi * (j + 0.75) / (n + 0.5))
    for _ in range(100):
        val, val_prev = _legendre(n, x)
        deriv = n * (x * val - val_prev) / (x * x - 1.0)
        dx = val / deriv
        x -= dx
        if np.max(np.abs(dx)) < _NEWTON_TOL:
            break
    residual = np.max(np.abs(_legendre(n, x)[0]))
    if residual > _RESIDUAL_TOL:
        raise RuntimeError(f"GL Newton iteration stalled at residual {residual:.2e}")
    x = 0.5 * (x - x[::-1])  # enforce exact antisymmetry
    w = 2.0 / ((1.0 - x * x) * _legendre_deriv(n, x) ** 2)
    return x, 0.5 * (w + w[::-1])


def _gauss_lobatto(p: int) -> tuple[np.ndarray, np.ndarray]:
    """Endpoints plus the roots of L_p', and the matching weights."""
    n = p + 1
    x = np.empty(n)
    x[0], x[-1] = -1.0, 1.0
    if p > 1:
        # interior nodes: roots of L_p', seeded with Chebyshev-Lobatto points
        y = -np.cos(np.pi * np.arange(1, p) / p)
        for _ in range(100):
            val, val_prev = _legendre(p, y)
            d1 = p * (y * val - val_prev) / (y * y - 1.0)
            d2 = (2.0 * y * d1 - p * (p + 1) * val) / (1.0 - y * y)
            dy = d1 / d2
            y -= dy
            if np.max(np.abs(dy)) < _NEWTON_TOL:
                break
        # L_p' swings with slope ~ p(p+1) L_p near its roots, so the
        # residual is measured in units of that scale
        residual = np.max(np.abs(_legendre_deriv(p, y))) / (0.5 * p * (p + 1))
        if residual > _RESIDUAL_TOL:
            raise RuntimeError(f"GLL Newton iteration stalled at residual {residual:.2e}")
        x[1:-1] = 0.5 * (y - y[::-1])
    w = 2.0 / (p * (p + 1) * _legendre(p, x)[0] ** 2)
    return x, 0.5 * (w + w[::-1])


def make_rule(kind: NodeKind | str, p: int, max_degree: int = MAX_DEGREE) -> QuadratureRule:
    """Build the degree-p rule of the requested node family.

    GLL needs p >= 1 (a one-point Lobatto rule does not exist); degrees
    above ``max_degree`` are rejected to keep the Newton iteration well
    conditioned.
    """
    kind = NodeKind(kind)
    if p < 0:
        raise ValueError(f"degree must be nonnegative, got {p}")
    if p > max_degree:
        raise ValueError(f"degree {p} exceeds the configured maximum {max_degree}")
    if kind is NodeKind.GAUSS_LEGENDRE:
        nodes, weights = _gauss_legendre(p)
    else:
        if p < 1:
            raise ValueError("GLL rules need degree >= 1 (two-point minimum)")
        nodes, weights = _gauss_lobatto(p)
    if np.any(np.diff(nodes) <= 0) or np.any(weights <= 0):
        raise RuntimeError("generated rule violates node ordering or weight positivity")
    if abs(weights.sum() - 2.0) > 1e-13:
        raise RuntimeError(f"weights sum to {weights.sum()!r}, expected 2")
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return QuadratureRule(kind=kind, degree=p, nodes=nodes, weights=weights)


def weight_quotient_max(rule: QuadratureRule) -> float:
    """Largest ratio of two quadrature weights; grows at worst linearly in p."""
    w = rule.weights
    return float(w.max() / w.min())


def min_node_distance(rule: QuadratureRule) -> float:
    """Smallest gap between adjacent nodes; bounded below by const / p^3."""
    if rule.degree < 1:
        raise ValueError("node distance needs at least two nodes")
    return float(np.min(np.diff(rule.nodes)))
