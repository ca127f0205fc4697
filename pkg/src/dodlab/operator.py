"""Assembly of the semidiscrete right-hand-side operator L with u' = L u.

The scheme is an upwind nodal DG method written per cell on the
reference element.  With M the diagonal reference mass, D the nodal
differentiation matrix, and R/L the boundary extrapolation rows, the
unstabilized (background) update of cell i reads

    u_i' = S_i M^{-1} ((D^T M - R^T R) u_i + L^T R u_{i-1}),   S_i = 2a/dx_i.

On a cut mesh the small-cell penalty modifies the four cells around the
cut: a share eta_c of the flux entering the small cell is redistributed
straight to its outflow neighbor (extrapolating the inflow-cell
polynomial to the outflow point via the row B_J), and a volume term
built from the extrapolation matrix I regulates the gradients inside
the small cell.  The affected blocks are

    row c-1:  diag  S_{c-1} M^{-1} (D^T M - R^T R - eta I^T D^T M I)
              right S_{c-1} M^{-1} (eta I^T D^T M)
              left  background
    row c:    left  S_c M^{-1} (eta D^T M I + L^T R - eta R^T B_J)
              diag  S_c (1 - eta) M^{-1} (D^T M - R^T R)
    row c+1:  LL    S_{c+1} M^{-1} (eta L^T B_J)
              left  S_{c+1} (1 - eta) M^{-1} L^T R
              diag  background

All blocks annihilate constant states, so free streams are preserved
for every eta.
"""

from dataclasses import dataclass, field

import numpy as np

from .lagrange import CutInterpolation, LagrangeOperators, build_cut_interpolation, build_operators
from .mesh import CutMesh, mass_diagonal
from .quadrature import QuadratureRule

_MIN_ASSEMBLY_ALPHA = 1e-12
_DENSE_GUARD = 20000


@dataclass(frozen=True)
class AdvectionConfig:
    """Constant advection speed a > 0."""

    speed: float = 1.0

    def __post_init__(self) -> None:
        if self.speed <= 0:
            raise ValueError(f"advection speed must be positive, got {self.speed}")


@dataclass(frozen=True)
class PenaltyConfig:
    """Stabilization cutoff: eta = 1 - min(1, alpha / lambda_c), or 0 if disabled."""

    lambda_c: float = 1.0
    enabled: bool = True

    def __post_init__(self) -> None:
        if self.lambda_c <= 0:
            raise ValueError(f"lambda_c must be positive, got {self.lambda_c}")


def eta(penalty: PenaltyConfig, alpha: float) -> float:
    """Penalty strength in [0, 1]; full at alpha -> 0, off for alpha >= lambda_c."""
    if not penalty.enabled:
        return 0.0
    return 1.0 - min(1.0, alpha / penalty.lambda_c)


@dataclass(frozen=True)
class GlobalOperator:
    """Block-sparse right-hand-side matrix of the semidiscretization.

    ``blocks`` maps (row cell, column cell) to dense (p+1)x(p+1)
    matrices; ``mass`` is the diagonal of the global mass matrix.  The
    pieces used to assemble the stabilized rows (reference operators,
    cut interpolation, eta, per-cell scalings 2a/dx_i) are kept for the
    norm reports.
    """

    mesh: CutMesh
    rule: QuadratureRule
    advection: AdvectionConfig
    blocks: dict[tuple[int, int], np.ndarray] = field(repr=False)
    mass: np.ndarray = field(repr=False)
    ops: LagrangeOperators = field(repr=False)
    cut: CutInterpolation | None = field(repr=False)
    eta_c: float = 0.0
    _dense_cache: list = field(default_factory=list, repr=False, compare=False)

    @property
    def block_size(self) -> int:
        return self.rule.n_nodes

    @property
    def dim(self) -> int:
        return self.block_size * self.mesh.n_cells

    def block(self, i: int, j: int) -> np.ndarray:
        """Block at cell pair (i, j); zeros if the pair is structurally empty."""
        b = self.blocks.get((i, j))
        if b is None:
            return np.zeros((self.block_size, self.block_size))
        return b

    def named_blocks(self) -> dict[str, np.ndarray]:
        """The eight blocks around the cut plus a background pair.

        Keys: L_cm1, L_cm1R, L_cm1L, L_cL, L_c, L_cp1LL, L_cp1L, L_cp1
        for the stabilized stencil, L_bg / L_bgL for an unaffected row.
        """
        if self.mesh.cut_index is None:
            raise ValueError("named stencil blocks exist only on cut meshes")
        c = self.mesh.cut_index
        n = self.mesh.n_cells
        bg = c - 2 if c >= 2 else c + 3  # any row untouched by the stabilization
        return {
            "L_cm1": self.block(c - 1, c - 1),
            "L_cm1R": self.block(c - 1, c),
            "L_cm1L": self.block(c - 1, (c - 2) % n),
            "L_cL": self.block(c, c - 1),
            "L_c": self.block(c, c),
            "L_cp1LL": self.block(c + 1, c - 1),
            "L_cp1L": self.block(c + 1, c),
            "L_cp1": self.block(c + 1, c + 1),
            "L_bg": self.block(bg, bg),
            "L_bgL": self.block(bg, (bg - 1) % n),
        }

    def apply(self, u: np.ndarray) -> np.ndarray:
        """Block-sparse product L @ u."""
        u = np.asarray(u, dtype=float)
        if u.shape != (self.dim,):
            raise ValueError(f"state has shape {u.shape}, expected ({self.dim},)")
        k = self.block_size
        out = np.zeros(self.dim)
        for (i, j), b in self.blocks.items():
            out[i * k : (i + 1) * k] += b @ u[j * k : (j + 1) * k]
        return out

    def apply_transpose(self, u: np.ndarray) -> np.ndarray:
        """Block-sparse product L^T @ u (used by the iterative norm path)."""
        u = np.asarray(u, dtype=float)
        if u.shape != (self.dim,):
            raise ValueError(f"state has shape {u.shape}, expected ({self.dim},)")
        k = self.block_size
        out = np.zeros(self.dim)
        for (i, j), b in self.blocks.items():
            out[j * k : (j + 1) * k] += b.T @ u[i * k : (i + 1) * k]
        return out

    def dense(self) -> np.ndarray:
        """Materialize L as a dense matrix (guarded against absurd sizes)."""
        if self.dim > _DENSE_GUARD:
            raise ValueError(f"dense materialization refused for dimension {self.dim}")
        if not self._dense_cache:
            k = self.block_size
            A = np.zeros((self.dim, self.dim))
            for (i, j), b in self.blocks.items():
                A[i * k : (i + 1) * k, j * k : (j + 1) * k] = b
            A.flags.writeable = False
            self._dense_cache.append(A)
        return self._dense_cache[0]

    def write_triplets(self, path) -> None:
        """Dump the nonzero entries as plain-text ``row col value`` lines."""
        k = self.block_size
        with open(path, "w") as fh:
            for (i, j) in sorted(self.blocks):
                b = self.blocks[(i, j)]
                for r in range(k):
                    for s in range(k):
                        if b[r, s] != 0.0:
                            fh.write(f"{i * k + r} {j * k + s} {float(b[r, s])!r}\n")


def assemble_with_eta(
    mesh: CutMesh,
    rule: QuadratureRule,
    advection: AdvectionConfig = AdvectionConfig(),
    eta_c: float = 0.0,
) -> GlobalOperator:
    """Assemble L for an explicit penalty strength eta_c in [0, 1]."""
    if not 0.0 <= eta_c <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta_c}")
    if mesh.cut_index is not None and mesh.alpha < _MIN_ASSEMBLY_ALPHA:
        raise ValueError(f"cut fraction {mesh.alpha} below assembly floor {_MIN_ASSEMBLY_ALPHA}")
    ops = build_operators(rule)
    n = mesh.n_cells
    w = ops.M_R
    scal = 2.0 * advection.speed / mesh.cell_widths
    DtM = ops.D.T * w[None, :]
    B_R = np.outer(ops.R_hat, ops.R_hat)
    B_L = np.outer(ops.L_hat, ops.R_hat)
    minv = 1.0 / w[:, None]
    base_diag = minv * (DtM - B_R)
    base_left = minv * B_L

    blocks: dict[tuple[int, int], np.ndarray] = {}
    for i in range(n):
        blocks[(i, i)] = scal[i] * base_diag
        blocks[(i, (i - 1) % n)] = scal[i] * base_left

    cut = None
    if mesh.cut_index is not None:
        c = mesh.cut_index
        cut = build_cut_interpolation(rule, mesh.alpha)
        DtMI = DtM @ cut.I
        ItDtM = cut.I.T @ DtM
        blocks[(c - 1, c - 1)] = scal[c - 1] * (minv * (DtM - B_R - eta_c * (ItDtM @ cut.I)))
        blocks[(c, c - 1)] = scal[c] * (
            minv * (eta_c * DtMI + B_L - eta_c * np.outer(ops.R_hat, cut.B_J))
        )
        blocks[(c, c)] = scal[c] * (1.0 - eta_c) * base_diag
        blocks[(c + 1, c)] = scal[c + 1] * (1.0 - eta_c) * base_left
        if eta_c != 0.0:
            blocks[(c - 1, c)] = scal[c - 1] * eta_c * (minv * ItDtM)
            blocks[(c + 1, c - 1)] = scal[c + 1] * eta_c * (minv * np.outer(ops.L_hat, cut.B_J))

    # Constants are annihilated in exact arithmetic; remove the rounding
    # defect of each block row (amplified by 2a/dx_c on tiny cut cells) by
    # spreading it over the diagonal block, as for the D diagonal.
    unit_row = 0.5 * w
    for i in range(n):
        defect = sum(b @ np.ones(rule.n_nodes) for (r, _), b in blocks.items() if r == i)
        blocks[(i, i)] = blocks[(i, i)] - np.outer(defect, unit_row)

    for b in blocks.values():
        b.flags.writeable = False
    return GlobalOperator(
        mesh=mesh,
        rule=rule,
        advection=advection,
        blocks=blocks,
        mass=mass_diagonal(mesh, rule),
        ops=ops,
        cut=cut,
        eta_c=eta_c,
    )


def assemble(
    mesh: CutMesh,
    rule: QuadratureRule,
    advection: AdvectionConfig = AdvectionConfig(),
    penalty: PenaltyConfig = PenaltyConfig(),
) -> GlobalOperator:
    """Assemble L with the penalty strength derived from ``penalty``."""
    eta_c = eta(penalty, mesh.alpha) if mesh.cut_index is not None else 0.0
    return assemble_with_eta(mesh, rule, advection, eta_c)
