from .distributions import (
    LabeledDistribution,
    NullDistribution,
    PlantedBoolean,
    PlantedReal,
    RealScaledLabels,
    planted_distribution,
)
from .oracle import (
    OracleKind,
    OracleMode,
    Adversary,
    SQQuery,
    OracleAnswer,
    StatOracle,
    sq_oracle,
    correlation_query,
    csq_oracle,
)
from .correlation import (
    CorrelationCheck,
    SQDimensionEstimate,
    joint_projection_factor,
    chi_pairwise,
    conditional_chi_square,
    correlation_bound_check,
    sq_dimension_bound,
    sq_dimension_estimate,
)
from .distinguisher import (
    Verdict,
    LearnerConfig,
    DistinguishResult,
    distinguish_boolean,
    distinguish_real,
)

__all__ = [
    'LabeledDistribution',
    'NullDistribution',
    'PlantedBoolean',
    'PlantedReal',
    'RealScaledLabels',
    'planted_distribution',
    'OracleKind',
    'OracleMode',
    'Adversary',
    'SQQuery',
    'OracleAnswer',
    'StatOracle',
    'sq_oracle',
    'correlation_query',
    'csq_oracle',
    'CorrelationCheck',
    'SQDimensionEstimate',
    'joint_projection_factor',
    'chi_pairwise',
    'conditional_chi_square',
    'correlation_bound_check',
    'sq_dimension_bound',
    'sq_dimension_estimate',
    'Verdict',
    'LearnerConfig',
    'DistinguishResult',
    'distinguish_boolean',
    'distinguish_real',
]
