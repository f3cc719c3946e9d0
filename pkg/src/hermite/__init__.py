from .polynomials import hermite_eval, hermite_table, multi_hermite_eval
from .multi_index import MultiIndex, multi_indices
from .expansion import (
    HermiteExpansion,
    expand,
    degree_part,
    truncate_below,
    tail_from,
    eval_expansion,
    l2_norm,
)
from .norms import lp_norm, hypercontractive_chain, derivative_tensor, harmonic_inner_product

__all__ = [
    'hermite_eval',
    'hermite_table',
    'multi_hermite_eval',
    'MultiIndex',
    'multi_indices',
    'HermiteExpansion',
    'expand',
    'degree_part',
    'truncate_below',
    'tail_from',
    'eval_expansion',
    'l2_norm',
    'lp_norm',
    'hypercontractive_chain',
    'derivative_tensor',
    'harmonic_inner_product',
]
