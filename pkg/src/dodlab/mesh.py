"""Periodic 1D meshes with at most one cut cell.

A cut mesh consists of ``n_background`` cells of uniform width dx, one
of which is split by an extra vertex into a small fragment of width
alpha*dx (the cut cell) and its right neighbor of width (1-alpha)*dx.
Cells are indexed 0..N-1 with N = n_background + 1; ``cut_index`` is
the index of the small fragment.  ``cut_index=None`` gives the plain
uniform background mesh (no cut), used for baseline runs.
"""

from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from .quadrature import QuadratureRule


@dataclass(frozen=True)
class CutMesh:
    x_left: float
    x_right: float
    n_background: int
    cut_index: int | None
    alpha: float | None
    cell_widths: np.ndarray = field(repr=False)

    @property
    def n_cells(self) -> int:
        return len(self.cell_widths)

    @property
    def dx(self) -> float:
        """Background cell width."""
        return (self.x_right - self.x_left) / self.n_background

    @property
    def vertices(self) -> np.ndarray:
        return self.x_left + np.concatenate(([0.0], np.cumsum(self.cell_widths)))


def make_mesh(domain: tuple[float, float], n_background: int, cut_index: int, alpha: float) -> CutMesh:
    """Uniform periodic mesh with one cell split at fraction ``alpha``.

    The stabilization stencil spans cells cut_index-1 .. cut_index+2, so
    the cut may not sit next to the domain boundary (the periodic wrap
    of the stencil is not supported) and ``n_background >= 4``.
    """
    x_left, x_right = map(float, domain)
    if x_right <= x_left:
        raise ValueError(f"empty domain ({x_left}, {x_right})")
    if n_background < 4:
        raise ValueError("need at least 4 background cells for the stabilized stencil")
    if not 0.0 < alpha <= 0.5:
        raise ValueError(f"cut-cell fraction must be in (0, 1/2], got {alpha}")
    n_cells = n_background + 1
    if not 1 <= cut_index <= n_cells - 3:
        raise ValueError(
            f"cut_index {cut_index} puts the stabilized stencil across the periodic "
            f"boundary (valid range 1..{n_cells - 3} for {n_cells} cells)"
        )
    dx = (x_right - x_left) / n_background
    widths = np.full(n_cells, dx)
    widths[cut_index] = alpha * dx
    widths[cut_index + 1] = (1.0 - alpha) * dx
    widths.flags.writeable = False
    return CutMesh(
        x_left=x_left,
        x_right=x_right,
        n_background=n_background,
        cut_index=cut_index,
        alpha=float(alpha),
        cell_widths=widths,
    )


def make_uniform_mesh(domain: tuple[float, float], n_cells: int) -> CutMesh:
    """Plain periodic mesh without a cut (background method baseline)."""
    x_left, x_right = map(float, domain)
    if x_right <= x_left:
        raise ValueError(f"empty domain ({x_left}, {x_right})")
    if n_cells < 1:
        raise ValueError("need at least 1 cell")
    widths = np.full(n_cells, (x_right - x_left) / n_cells)
    widths.flags.writeable = False
    return CutMesh(
        x_left=x_left,
        x_right=x_right,
        n_background=n_cells,
        cut_index=None,
        alpha=None,
        cell_widths=widths,
    )


def mapped_nodes(mesh: CutMesh, rule: QuadratureRule) -> np.ndarray:
    """Quadrature nodes of every cell, shape (n_cells, p+1).

    Cell i maps the reference coordinate g through
    x(g) = (x_i + x_{i-1})/2 + g * dx_i / 2.
    """
    v = mesh.vertices
    centers = 0.5 * (v[:-1] + v[1:])
    return centers[:, None] + 0.5 * mesh.cell_widths[:, None] * rule.nodes[None, :]


def mass_diagonal(mesh: CutMesh, rule: QuadratureRule) -> np.ndarray:
    """Diagonal of the global mass matrix: weights scaled by dx_i / 2."""
    return (0.5 * mesh.cell_widths[:, None] * rule.weights[None, :]).ravel()


def project_initial_condition(
    mesh: CutMesh, rule: QuadratureRule, f: Callable[[np.ndarray], np.ndarray]
) -> np.ndarray:
    """Nodal interpolant of ``f``: its values at the mapped quadrature nodes."""
    return np.asarray(f(mapped_nodes(mesh, rule)), dtype=float).ravel()
