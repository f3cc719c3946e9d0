from .gauss_hermite import (
    QuadratureRule,
    gauss_hermite_rule,
    expect,
    tensor_expect,
    tensor_points,
    evaluate_points,
    grid_order,
)
from .monte_carlo import McEstimate, make_rng, mc_expect, standard_normal_sampler

__all__ = [
    'QuadratureRule',
    'gauss_hermite_rule',
    'expect',
    'tensor_expect',
    'tensor_points',
    'evaluate_points',
    'grid_order',
    'McEstimate',
    'make_rng',
    'mc_expect',
    'standard_normal_sampler',
]
