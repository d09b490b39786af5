"""Nonsmooth variable projection: reduced objectives, simplex smoothing,
outer solvers, and domain instantiations (exponential fitting, trimmed
robust regression, multiple kernel learning, toy inverse problems)."""

from .estimators import MultipleKernelClassifier, TrimmedLogisticRegression
from .lasso import LassoProblem, LassoSolution, soft_threshold, solve_lasso
from .projections import (
    CappedSimplex,
    SmoothedMinResult,
    brute_force_projection,
    project_capped_simplex,
    project_simplex,
    smoothed_weighted_min,
)
from .solvers import (
    ReducedObjective,
    RunTrace,
    SolverOptions,
    TerminationStatus,
    fd_gradient_check,
    lbfgs_minimize,
    prox_gradient_minimize,
)

__all__ = [
    "CappedSimplex",
    "LassoProblem",
    "LassoSolution",
    "MultipleKernelClassifier",
    "ReducedObjective",
    "RunTrace",
    "SmoothedMinResult",
    "SolverOptions",
    "TerminationStatus",
    "TrimmedLogisticRegression",
    "brute_force_projection",
    "fd_gradient_check",
    "lbfgs_minimize",
    "project_capped_simplex",
    "project_simplex",
    "prox_gradient_minimize",
    "smoothed_weighted_min",
    "soft_threshold",
    "solve_lasso",
]

__version__ = "0.1.0"
