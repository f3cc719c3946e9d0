from .construction import (
    UNIFORM_MASS,
    gaussian_uniform_split,
    MomentMatchSpec,
    FamilyDraw,
    FamilySample,
    sample_family,
    sample_families,
    sample_scaled,
)
from .statistics import (
    MomentReport,
    ProductMoment,
    DensityRatio,
    PtfSeparation,
    gaussian_moment,
    gap_mass,
    expected_gap_mass,
    marginal_ks,
    check_moments,
    product_moments,
    density_ratio_histogram,
    ptf_separation,
)

__all__ = [
    'UNIFORM_MASS',
    'gaussian_uniform_split',
    'MomentMatchSpec',
    'FamilyDraw',
    'FamilySample',
    'sample_family',
    'sample_families',
    'sample_scaled',
    'MomentReport',
    'ProductMoment',
    'DensityRatio',
    'PtfSeparation',
    'gaussian_moment',
    'gap_mass',
    'expected_gap_mass',
    'marginal_ks',
    'check_moments',
    'product_moments',
    'density_ratio_histogram',
    'ptf_separation',
]
