"""Optimistic multiplicative-weights dynamics for two-player zero-sum games."""

from .bench import SweepConfig, gen_random_game, sweep_dimension, sweep_error
from .dynamics import (
    DynamicsState,
    RunConfig,
    RunResult,
    TrajectoryRecord,
    kl_divergence,
    linear_omwu_step,
    mwu_step,
    omwu_step,
    run,
)
from .game import (
    MatrixGame,
    QualityReport,
    SimplexPoint,
    alpha_closeness,
    epsilon_gap,
    payoff,
    quality_report,
)
from .oracle import Equilibrium, check_uniqueness, solve_lp, solve_support_enum
from .spectral import (
    ContractionCertificate,
    certify_contraction,
    jacobian_at_equilibrium,
    jacobian_general,
    lambda_from_sigma,
    reduce_jacobian,
)

__all__ = [
    "MatrixGame",
    "SimplexPoint",
    "QualityReport",
    "Equilibrium",
    "payoff",
    "epsilon_gap",
    "alpha_closeness",
    "quality_report",
    "solve_lp",
    "solve_support_enum",
    "check_uniqueness",
    "DynamicsState",
    "RunConfig",
    "RunResult",
    "TrajectoryRecord",
    "omwu_step",
    "linear_omwu_step",
    "mwu_step",
    "kl_divergence",
    "run",
    "ContractionCertificate",
    "jacobian_general",
    "jacobian_at_equilibrium",
    "reduce_jacobian",
    "lambda_from_sigma",
    "certify_contraction",
    "gen_random_game",
    "SweepConfig",
    "sweep_dimension",
    "sweep_error",
]
