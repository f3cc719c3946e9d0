from .lp import LinearProgram, LpSolution, LpStatus, solve_lp
from .simplex import DenseSimplex
from .polynomial import (
    ApproxResult,
    best_l2,
    best_l1,
    degree_profile,
    min_degree,
    lp_error,
    continuous_l1_error,
    grid_values,
    scaled_basis,
)
from .witness import (
    DualWitness,
    RealWitnessReport,
    CsqHardFunction,
    dual_witness,
    duality_gap,
    dual_witness_real,
    csq_hard_function,
)
from .scaling import ScalingFit, fit_scaling, scaling_fit

__all__ = [
    'LinearProgram',
    'LpSolution',
    'LpStatus',
    'solve_lp',
    'DenseSimplex',
    'ApproxResult',
    'best_l2',
    'best_l1',
    'degree_profile',
    'min_degree',
    'lp_error',
    'continuous_l1_error',
    'grid_values',
    'scaled_basis',
    'DualWitness',
    'RealWitnessReport',
    'CsqHardFunction',
    'dual_witness',
    'duality_gap',
    'dual_witness_real',
    'csq_hard_function',
    'ScalingFit',
    'fit_scaling',
    'scaling_fit',
]
