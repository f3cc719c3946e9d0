from .sensitivity import (
    CorrelatedPairSampler,
    GnsRow,
    StructuralCheck,
    halfspace_gns_closed_form,
    crossing_closed_form,
    gns_estimate,
    gns_intersection_scan,
    polynomial_sign,
    structural_inequality_check,
    ptf_gns_sanity,
)
from .circle import (
    TrigPolynomial,
    BooleanTrace,
    CircleInterpolant,
    BkIdentity,
    FilteringCheck,
    DerivativeCheck,
    SymmetrizationCheck,
    circle_fourier,
    circle_constants,
    chebyshev_nodes,
    leading_coefficient,
    chebyshev_circle_interpolate,
    bk_identity_check,
    filtering_identity_check,
    derivative_bound_check,
    circle_symmetrization_check,
)

__all__ = [
    'CorrelatedPairSampler',
    'GnsRow',
    'StructuralCheck',
    'halfspace_gns_closed_form',
    'crossing_closed_form',
    'gns_estimate',
    'gns_intersection_scan',
    'polynomial_sign',
    'structural_inequality_check',
    'ptf_gns_sanity',
    'TrigPolynomial',
    'BooleanTrace',
    'CircleInterpolant',
    'BkIdentity',
    'FilteringCheck',
    'DerivativeCheck',
    'SymmetrizationCheck',
    'circle_fourier',
    'circle_constants',
    'chebyshev_nodes',
    'leading_coefficient',
    'chebyshev_circle_interpolate',
    'bk_identity_check',
    'filtering_identity_check',
    'derivative_bound_check',
    'circle_symmetrization_check',
]
