"""Regularized overestimated Newton with randomized low-rank Hessian sketching."""

from ._core import (
    EotDual,
    LeastSquares,
    NystromFactor,
    SmoothObjective,
    __version__,
    gaussian_marginal,
    grid_l1_cost,
    random_cost,
    rpc_factorize,
    rpc_sample_complexity,
    run_ron,
    sinkhorn,
    sv_profile,
    sv_profile_matrix,
    woodbury_solve,
)

__all__ = [
    "EotDual",
    "LeastSquares",
    "NystromFactor",
    "SmoothObjective",
    "__version__",
    "gaussian_marginal",
    "grid_l1_cost",
    "random_cost",
    "rpc_factorize",
    "rpc_sample_complexity",
    "run_ron",
    "sinkhorn",
    "sv_profile",
    "sv_profile_matrix",
    "woodbury_solve",
]
