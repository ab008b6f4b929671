"""Stake-weighted consensus scoring and a hash-chained cooperation ledger
for a simulated multi-robot team.

A robot's vote weight is its share of the total stake. Two robots agree in
proportion to the match qualities of the landmarks they both recognize, and
a robot's navigability aggregates those agreements over all partners,
weighted by how often each pair has cooperated on the ledger. Block
generators are elected by navigability and earn stake, closing the loop.
"""
from __future__ import annotations

from .consensus import (
    DegenerateStakesError,
    ScanCounter,
    StakeTable,
    VisibilitySnapshot,
    common_landmarks,
    consensus_score,
    consensus_score_matrix,
    elect_generator,
    indicator,
    stake_weight,
)
from .domain import (
    ConfigError,
    InvalidPairError,
    Landmark,
    ObservationMatch,
    RandomStreams,
    RobotState,
    WorldConfig,
    derive_stream,
    init_world,
    normalize_pair,
)
from .ledger import (
    GENESIS_PREV_HASH,
    KIND_OBSERVATION,
    KIND_REWARD,
    Block,
    Chain,
    LedgerError,
    LedgerFormatError,
    Transaction,
    canonical_encode,
    verify_dump_bytes,
)
from .navigability import (
    IMPORTANCE_LEVELS,
    AlphaMatrix,
    NavigabilityMatrix,
    UndefinedAverageError,
    alpha_importance,
    average_navigability,
    navigability,
    navigability_matrix,
)
from .sim import (
    DegradationScenario,
    ExperimentState,
    compute_visibility,
    emit_transactions,
    maybe_seal_blocks,
    observation_matches,
    run_experiment,
    step_movement,
)

__version__ = "0.1.0"

__all__ = [
    "AlphaMatrix",
    "Block",
    "Chain",
    "ConfigError",
    "DegenerateStakesError",
    "DegradationScenario",
    "ExperimentState",
    "GENESIS_PREV_HASH",
    "IMPORTANCE_LEVELS",
    "InvalidPairError",
    "KIND_OBSERVATION",
    "KIND_REWARD",
    "Landmark",
    "LedgerError",
    "LedgerFormatError",
    "NavigabilityMatrix",
    "ObservationMatch",
    "RandomStreams",
    "RobotState",
    "ScanCounter",
    "StakeTable",
    "Transaction",
    "UndefinedAverageError",
    "VisibilitySnapshot",
    "WorldConfig",
    "alpha_importance",
    "average_navigability",
    "canonical_encode",
    "common_landmarks",
    "compute_visibility",
    "consensus_score",
    "consensus_score_matrix",
    "derive_stream",
    "elect_generator",
    "emit_transactions",
    "indicator",
    "init_world",
    "maybe_seal_blocks",
    "navigability",
    "navigability_matrix",
    "normalize_pair",
    "observation_matches",
    "run_experiment",
    "stake_weight",
    "step_movement",
    "verify_dump_bytes",
]
