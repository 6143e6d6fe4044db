"""Semigroup, resolvent, and ODE solving for 1-D second-order operators.

The evolution generated by a(x) f'' + b(x) f' + c(x) f is approximated by
n-fold composition of explicit Gaussian one-step operators; the resolvent
(lam - H)^{-1} follows by exponentially weighted time quadrature with a
certified truncation tail, which in turn solves
a f'' + b f' + (c - lam) f = -g with finite-difference residual checks.
"""

from .grid import (
    Grid1D,
    GridFunction,
    default_grid,
    fd_derivatives,
    read_csv,
    residual_margin,
    sample,
    sup_norm,
    write_csv,
)
from .kernel import (
    ChernoffConfig,
    apply_S,
    apply_S1,
    apply_S2,
    apply_S3,
    tangency_defect,
)
from .oracles import fd_bvp_solve, green_reference, heat_reference
from .problem import (
    CoefficientSet,
    Finding,
    KernelConvention,
    ProblemSpec,
    SemigroupBounds,
    ValidationFailure,
    bounds_for,
    coefficients_from_config,
    function_from_preset,
    growth_bound,
    potential,
    validate,
)
from .resolvent import (
    LaplaceRule,
    ResolventReport,
    build_laplace_rule,
    ode_residual_sup,
    refine_rule,
    resolve_apply,
    resolve_matrix,
    resolve_values,
    solve_ode,
    truncation_horizon,
)
from .semigroup import ConvergenceStudy, convergence_study, evolve, evolve_values

__all__ = [
    "ChernoffConfig",
    "CoefficientSet",
    "ConvergenceStudy",
    "Finding",
    "Grid1D",
    "GridFunction",
    "KernelConvention",
    "LaplaceRule",
    "ProblemSpec",
    "ResolventReport",
    "SemigroupBounds",
    "ValidationFailure",
    "apply_S",
    "apply_S1",
    "apply_S2",
    "apply_S3",
    "bounds_for",
    "build_laplace_rule",
    "coefficients_from_config",
    "convergence_study",
    "default_grid",
    "evolve",
    "evolve_values",
    "fd_bvp_solve",
    "fd_derivatives",
    "function_from_preset",
    "green_reference",
    "growth_bound",
    "heat_reference",
    "ode_residual_sup",
    "potential",
    "read_csv",
    "refine_rule",
    "residual_margin",
    "resolve_apply",
    "resolve_matrix",
    "resolve_values",
    "sample",
    "solve_ode",
    "sup_norm",
    "tangency_defect",
    "truncation_horizon",
    "validate",
    "write_csv",
]

__version__ = "0.1.0"
