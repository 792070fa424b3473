"""Numerical checks of consistency, stability and convergence for 1-D finite-difference schemes."""

from .grid_problem import (
    BVProblem,
    Grid,
    GridFunction,
    GridNorm,
    UnknownProblemError,
    constant_rhs,
    grid_norm,
    parse_problem,
    poly,
    restrict_data,
    restrict_solution,
    sine,
    validate_problem,
    zero,
)
from .laxcheck import (
    ConvergenceReport,
    MethodInstance,
    assemble,
    global_error,
    lax_chain_check,
    local_error,
    refinement_study,
)
from .spectral import (
    EigenPair,
    SpectralSummary,
    analytic_eigenpair,
    stability_summary,
    verify_eigenpair,
)
from .taylor_consistency import consistency_bound, truncation_order_fit
from .tridiag import (
    TridiagonalOperator,
    build_scheme_operator,
    determinant_sequence,
    matvec,
    solve,
)

__version__ = "0.1.0"
