"""Cut-cell DGSEM for 1D linear advection with domain-of-dependence stabilization.

The package builds the semidiscrete operator of a nodal discontinuous
Galerkin spectral element method on a periodic 1D mesh containing one
arbitrarily small cut cell, adds the domain-of-dependence penalty terms
that remove the small-cell time step restriction, and provides the
analysis tooling around it: mass-weighted operator norms, min-max
optimization of the penalty cutoff, sharp-CFL searches with SSP
Runge-Kutta integrators, and convergence / work-precision studies.
"""

from .quadrature import NodeKind, QuadratureRule, make_rule, min_node_distance, weight_quotient_max
from .lagrange import CutInterpolation, LagrangeOperators, build_cut_interpolation, build_operators
from .mesh import CutMesh, make_mesh, make_uniform_mesh, mass_diagonal, project_initial_condition
from .operator import AdvectionConfig, GlobalOperator, PenaltyConfig, assemble, assemble_with_eta, eta
from .norms import (
    WeightedNorm,
    adjoint_norm_check,
    block_norm_report,
    derivative_interpolation_norm,
    global_operator_norm,
    interpolation_norm,
    norm,
    operator_norm,
    outflow_extrapolation_norm,
)
from .timestepping import (
    EULER,
    METHODS,
    SSPRK22,
    SSPRK33,
    SSPRK104,
    InstabilityError,
    RKMethod,
    Trajectory,
    evolve,
    stability_polynomial,
    step,
)
from .analysis import (
    CflResult,
    OptimizerResult,
    SweepSpec,
    opnorm_sweep,
    optimize_lambda,
    optimized_lambda,
    scaling_fit,
    sharp_cfl_search,
)

__version__ = "0.1.0"
