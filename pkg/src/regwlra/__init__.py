"""Regularized weighted low-rank approximation with sketched alternating minimization."""
from .matrix_core import (
    Factorization,
    WlraProblem,
    hadamard,
    numerical_rank,
    objective_col_form,
    objective_row_form,
    stable_rank,
    statistical_dimension,
    weighted_objective,
)
from .ridge import (
    RichardsonConfig,
    RidgeProblem,
    batch_objective_ratio,
    build_preconditioner,
    richardson_solve,
    ridge_solve,
    sketched_ridge_solve,
)
from .sketch import (
    SketchKind,
    SketchSpec,
    distortion_factors,
    gamma_alpha_diagnostics,
    recommended_sketch_size,
    sample_sketch,
)
from .wlra import (
    AmConfig,
    Solver,
    alternating_minimization,
    best_response_U,
    best_response_V,
    rank_reduce_projection,
    rank_reduced_factorization,
    round_weight_factors,
    svd_baseline,
)

__version__ = "0.1.0"
