"""Least-core solvers for cooperative games."""

from .core import (
    Coalition,
    CharacteristicOracle,
    NormalizedGame,
    SampleEstimate,
    all_coalitions_matrix,
    coalition_loss,
    deficit,
    enumerate_coalitions,
    epsilon_hat,
    normalize,
    sample_coalitions,
)
from .games import (
    InducedSubgraphGame,
    MarginalContributionNetwork,
    TabularGame,
    WeightDistribution,
    WeightedVotingGame,
)
from .iterative import (
    LeastCoreResult,
    SolverConfig,
    adam_softmax_solve,
    cyclic_projection_solve,
    lcv_via_bisection,
    mirror_prox_solve,
    sgd_solve,
)

__all__ = [
    "Coalition",
    "CharacteristicOracle",
    "NormalizedGame",
    "SampleEstimate",
    "all_coalitions_matrix",
    "coalition_loss",
    "deficit",
    "enumerate_coalitions",
    "epsilon_hat",
    "normalize",
    "sample_coalitions",
    "InducedSubgraphGame",
    "MarginalContributionNetwork",
    "TabularGame",
    "WeightDistribution",
    "WeightedVotingGame",
    "LeastCoreResult",
    "SolverConfig",
    "adam_softmax_solve",
    "cyclic_projection_solve",
    "lcv_via_bisection",
    "mirror_prox_solve",
    "sgd_solve",
]

__version__ = "0.1.0"
