"""Reference-element matrices of the nodal Lagrange basis.

Everything is built with the second (barycentric) form of Lagrange
interpolation, Berrut & Trefethen (2004), which stays well conditioned
for clustered nodes.  The derivative matrix uses the standard
barycentric differentiation formula with the negative-sum trick for the
diagonal, so constants are annihilated exactly.
"""

from dataclasses import dataclass

import numpy as np

from .quadrature import NodeKind, QuadratureRule


@dataclass(frozen=True)
class LagrangeOperators:
    """Collocation matrices on the reference element.

    D is the nodal differentiation matrix, R_hat / L_hat the rows that
    extrapolate nodal values to the right / left endpoint, and M_R the
    diagonal of the reference mass matrix (the quadrature weights).
    """

    rule: QuadratureRule
    D: np.ndarray
    R_hat: np.ndarray
    L_hat: np.ndarray
    M_R: np.ndarray


@dataclass(frozen=True)
class CutInterpolation:
    """Extrapolation of a cell polynomial onto the reference cut cell.

    ``I`` maps nodal values on [-1, 1] to values at the image nodes
    xi_l = 1 + alpha * (1 + x_l) in [1, 1 + 2*alpha]; ``B_J`` is the row
    extrapolating to the cut cell's outflow point 1 + 2*alpha.
    """

    I: np.ndarray
    B_J: np.ndarray
    alpha: float


def barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / np.prod(diff, axis=1)


def lagrange_eval(nodes: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Tabulate the Lagrange basis: out[l, k] = l_k(points[l]).

    Uses the second barycentric form; evaluation points that coincide
    with a node take the exact-hit branch and return a unit row.
    """
    nodes = np.asarray(nodes, dtype=float)
    points = np.atleast_1d(np.asarray(points, dtype=float))
    w = barycentric_weights(nodes)
    diff = points[:, None] - nodes[None, :]
    hit_row, hit_col = np.nonzero(np.abs(diff) < 1e-14)
    diff[hit_row, hit_col] = 1.0
    out = w[None, :] / diff
    out /= out.sum(axis=1)[:, None]
    out[hit_row, :] = 0.0
    out[hit_row, hit_col] = 1.0
    return out


def differentiation_matrix(nodes: np.ndarray) -> np.ndarray:
    w = barycentric_weights(nodes)
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    D = (w[None, :] / w[:, None]) / diff
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))  # rows of D kill constants exactly
    return D


def build_operators(rule: QuadratureRule) -> LagrangeOperators:
    """Derivative matrix, boundary extrapolation rows, and reference mass."""
    nodes = rule.nodes
    D = differentiation_matrix(nodes)
    R_hat = lagrange_eval(nodes, np.array([1.0]))[0]
    L_hat = lagrange_eval(nodes, np.array([-1.0]))[0]
    if rule.kind is NodeKind.GAUSS_LOBATTO_LEGENDRE:
        # endpoints are collocation nodes; make the selectors exact
        R_hat = np.zeros(rule.n_nodes)
        R_hat[-1] = 1.0
        L_hat = np.zeros(rule.n_nodes)
        L_hat[0] = 1.0
    for a in (D, R_hat, L_hat):
        a.flags.writeable = False
    return LagrangeOperators(rule=rule, D=D, R_hat=R_hat, L_hat=L_hat, M_R=rule.weights)


def build_cut_interpolation(rule: QuadratureRule, alpha: float) -> CutInterpolation:
    """Extrapolation matrices from [-1, 1] to the reference cut cell.

    alpha is the cut-cell size fraction and must lie in [0, 1/2]; at
    alpha = 0 every image node collapses onto the right endpoint and all
    rows of I equal the boundary extrapolation row.
    """
    if not 0.0 <= alpha <= 0.5:
        raise ValueError(f"cut-cell fraction must be in [0, 1/2], got {alpha}")
    xi = 1.0 + alpha * (1.0 + rule.nodes)
    I = lagrange_eval(rule.nodes, xi)
    B_J = lagrange_eval(rule.nodes, np.array([1.0 + 2.0 * alpha]))[0]
    I.flags.writeable = False
    B_J.flags.writeable = False
    return CutInterpolation(I=I, B_J=B_J, alpha=float(alpha))
