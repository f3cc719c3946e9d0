from .exceptions import (
    LabError,
    ParameterError,
    EvaluationError,
    ResourceError,
    SolverError,
    DegenerateInputError,
    AnalysisError,
    SamplingError,
    ConfigError,
    AcceptanceFailure,
)

__all__ = [
    'LabError',
    'ParameterError',
    'EvaluationError',
    'ResourceError',
    'SolverError',
    'DegenerateInputError',
    'AnalysisError',
    'SamplingError',
    'ConfigError',
    'AcceptanceFailure',
]
