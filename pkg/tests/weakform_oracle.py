"""Brute-force assembly of the semidiscrete operator from the weak form.

Independent oracle for the block-formula assembly: basis functions are
evaluated as naive Lagrange products on the physical cells, all inner
products are taken with the owning cell's quadrature, and the upwind
flux, penalty flux-redistribution, and gradient-penalty terms are
accumulated term by term as bilinear forms.  Nothing here shares code
with the package's matrix construction.
"""

import math

import numpy as np

from dodlab.mesh import CutMesh, mapped_nodes
from dodlab.quadrature import QuadratureRule


def _lagrange_value(nodes: np.ndarray, j: int, x: float) -> float:
    out = 1.0
    for m, xm in enumerate(nodes):
        if m != j:
            out *= (x - xm) / (nodes[j] - xm)
    return out


def _lagrange_deriv(nodes: np.ndarray, j: int, x: float) -> float:
    terms = []
    for k, xk in enumerate(nodes):
        if k == j:
            continue
        term = 1.0 / (nodes[j] - xk)
        for m, xm in enumerate(nodes):
            if m != j and m != k:
                term *= (x - xm) / (nodes[j] - xm)
        terms.append(term)
    return math.fsum(terms)


def assemble_oracle(mesh: CutMesh, rule: QuadratureRule, speed: float, eta_c: float) -> np.ndarray:
    """Dense right-hand-side matrix -M^{-1} (A + J) from the bilinear forms."""
    n = mesh.n_cells
    k = rule.n_nodes
    dim = n * k
    nodes = mapped_nodes(mesh, rule)  # physical collocation nodes per cell
    verts = mesh.vertices
    w = rule.weights

    def dof(i: int, j: int) -> int:
        return i * k + j

    A = np.zeros((dim, dim))

    # volume terms: -a * int_{E_i} u dphi_{ij}/dx, cell-local quadrature
    for i in range(n):
        jac = 0.5 * mesh.cell_widths[i]
        for j in range(k):
            for l in range(k):
                acc = 0.0
                for q in range(k):
                    xq = nodes[i, q]
                    acc += w[q] * jac * _lagrange_value(nodes[i], l, xq) * _lagrange_deriv(nodes[i], j, xq)
                A[dof(i, j), dof(i, l)] += -speed * acc

    # upwind flux at every vertex: a * u|_{E_i}(v_{i+1}) * (v|_{E_i} - v|_{E_{i+1}})(v_{i+1})
    # (the downwind trace uses that cell's own left vertex, which matters
    # at the periodic wrap where the coordinates differ)
    for i in range(n):
        x = verts[i + 1]
        up = (i + 1) % n
        x_up = verts[up]
        for l in range(k):
            trace_u = _lagrange_value(nodes[i], l, x)
            for j in range(k):
                A[dof(i, j), dof(i, l)] += speed * _lagrange_value(nodes[i], j, x) * trace_u
                A[dof(up, j), dof(i, l)] += -speed * _lagrange_value(nodes[up], j, x_up) * trace_u

    if mesh.cut_index is not None and eta_c != 0.0:
        c = mesh.cut_index
        x_out = verts[c + 1]  # outflow boundary of the cut cell

        # flux redistribution: eta * a * (ext_{c-1}(u) - u|_{E_c})(x_out) * jump(v)
        for l in range(k):
            d_ext = _lagrange_value(nodes[c - 1], l, x_out)
            d_own = _lagrange_value(nodes[c], l, x_out)
            for j in range(k):
                for (cell, sign) in ((c, 1.0), (c + 1, -1.0)):
                    vj = _lagrange_value(nodes[cell], j, x_out)
                    A[dof(cell, j), dof(c - 1, l)] += sign * eta_c * speed * vj * d_ext
                    A[dof(cell, j), dof(c, l)] += -sign * eta_c * speed * vj * d_own

        # gradient penalty: eta * a * int_{E_c} (ext(u) - u) d/dx (ext(v) - v)
        jac = 0.5 * mesh.cell_widths[c]
        for q in range(k):
            xq = nodes[c, q]
            wq = w[q] * jac
            u_coef = np.zeros(dim)
            v_coef = np.zeros(dim)
            for l in range(k):
                u_coef[dof(c - 1, l)] += _lagrange_value(nodes[c - 1], l, xq)
                u_coef[dof(c, l)] -= _lagrange_value(nodes[c], l, xq)
                v_coef[dof(c - 1, l)] += _lagrange_deriv(nodes[c - 1], l, xq)
                v_coef[dof(c, l)] -= _lagrange_deriv(nodes[c], l, xq)
            A += eta_c * speed * wq * np.outer(v_coef, u_coef)

    mass = (0.5 * mesh.cell_widths[:, None] * w[None, :]).ravel()
    return -A / mass[:, None]
