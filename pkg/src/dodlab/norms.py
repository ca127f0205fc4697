"""Mass-weighted vector and operator norms.

For a positive diagonal weight M the vector norm is ||u|| = sqrt(u^T M u)
and the induced operator norm of A equals the largest singular value of
the symmetrized similarity M^{1/2} A M^{-1/2}.  The adjoint identity
||M^{-1} A^T M|| = ||A|| holds in this norm and is exposed as a check.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .lagrange import build_cut_interpolation, build_operators
from .operator import GlobalOperator
from .quadrature import QuadratureRule


class PowerIterationError(RuntimeError):
    """Iterative operator-norm path failed to converge."""


@dataclass(frozen=True)
class WeightedNorm:
    """Norm induced by a positive diagonal mass matrix."""

    diag: np.ndarray

    def __post_init__(self) -> None:
        d = np.asarray(self.diag, dtype=float)
        if d.ndim != 1 or np.any(d <= 0):
            raise ValueError("weight diagonal must be a 1D array of positive entries")


def norm(w: WeightedNorm, u: np.ndarray) -> float:
    u = np.asarray(u, dtype=float)
    if u.shape != w.diag.shape:
        raise ValueError(f"vector has shape {u.shape}, weights {w.diag.shape}")
    return float(np.sqrt(np.dot(w.diag, u * u)))


def _weighted_dense(diag: np.ndarray, A: np.ndarray) -> np.ndarray:
    s = np.sqrt(diag)
    return (s[:, None] * A) / s[None, :]


def operator_norm(w: WeightedNorm, A: np.ndarray) -> float:
    """Induced norm of a square matrix: sigma_max(M^{1/2} A M^{-1/2})."""
    A = np.asarray(A, dtype=float)
    n = w.diag.shape[0]
    if A.shape != (n, n):
        raise ValueError(f"matrix has shape {A.shape}, expected ({n}, {n})")
    return float(scipy.linalg.svdvals(_weighted_dense(w.diag, A))[0])


def adjoint_norm_check(w: WeightedNorm, A: np.ndarray) -> tuple[float, float]:
    """Return (||A||, ||M^{-1} A^T M||); the two agree to rounding."""
    adj = (A.T * w.diag[None, :]) / w.diag[:, None]
    return operator_norm(w, A), operator_norm(w, adj)


def global_operator_norm(
    op: GlobalOperator,
    method: str = "auto",
    dense_cutoff: int = 20000,
    tol: float = 1e-10,
    max_iter: int = 10000,
    restarts: int = 3,
    rng: np.random.Generator | None = None,
) -> float:
    """Mass-weighted norm of the assembled operator.

    The dense path computes the largest singular value of the weighted
    similarity directly; above ``dense_cutoff`` unknowns a power
    iteration on the Gram matrix is used instead (random start,
    ``restarts`` independent runs to guard against orthogonal starts).
    """
    if method == "auto":
        method = "dense" if op.dim <= dense_cutoff else "iterative"
    if method == "dense":
        return float(scipy.linalg.svdvals(_weighted_dense(op.mass, op.dense()))[0])
    if method != "iterative":
        raise ValueError(f"unknown method {method!r}")

    s = np.sqrt(op.mass)
    rng = rng if rng is not None else np.random.default_rng(0)

    def gram_matvec(v: np.ndarray) -> np.ndarray:
        bv = s * op.apply(v / s)
        return op.apply_transpose(bv * s) / s

    best = 0.0
    for _ in range(restarts):
        v = rng.standard_normal(op.dim)
        v /= np.linalg.norm(v)
        sigma = 0.0
        for _ in range(max_iter):
            gv = gram_matvec(v)
            new_sigma = float(np.sqrt(np.linalg.norm(gv)))
            if abs(new_sigma - sigma) <= tol * max(new_sigma, 1e-300):
                sigma = new_sigma
                break
            sigma = new_sigma
            nrm = np.linalg.norm(gv)
            if nrm == 0.0:
                break
            v = gv / nrm
        else:
            raise PowerIterationError(
                f"power iteration did not reach tolerance {tol} in {max_iter} iterations"
            )
        best = max(best, sigma)
    return best


def block_norm_report(op: GlobalOperator) -> dict[str, float]:
    """Reference-mass-weighted norms of the stencil blocks.

    Contains the eight blocks around the cut, a background pair, and the
    volume-penalty part ``star`` = S_{c-1} M^{-1} eta I^T D^T M I of the
    inflow cell's diagonal block, which drives the norm growth for large
    cut cells.
    """
    w = WeightedNorm(op.rule.weights)
    report = {name: operator_norm(w, b) for name, b in op.named_blocks().items()}
    c = op.mesh.cut_index
    scal = 2.0 * op.advection.speed / op.mesh.cell_widths
    weights = op.rule.weights
    DtM = op.ops.D.T * weights[None, :]
    star = scal[c - 1] * op.eta_c * ((op.cut.I.T @ DtM @ op.cut.I) / weights[:, None])
    report["star"] = operator_norm(w, star)
    return report


def interpolation_norm(rule: QuadratureRule, alpha: float) -> float:
    """Weighted norm of the extrapolation matrix onto the cut cell."""
    cut = build_cut_interpolation(rule, alpha)
    return operator_norm(WeightedNorm(rule.weights), cut.I)


def derivative_interpolation_norm(rule: QuadratureRule, alpha: float) -> float:
    """Weighted norm of D @ I; proportional to alpha."""
    cut = build_cut_interpolation(rule, alpha)
    ops = build_operators(rule)
    return operator_norm(WeightedNorm(rule.weights), ops.D @ cut.I)


def outflow_extrapolation_norm(rule: QuadratureRule, alpha: float) -> float:
    """Weighted norm of L^T B_J, the redistributed-outflow coupling."""
    cut = build_cut_interpolation(rule, alpha)
    ops = build_operators(rule)
    return operator_norm(WeightedNorm(rule.weights), np.outer(ops.L_hat, cut.B_J))
