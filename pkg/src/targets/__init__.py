from .normal import normal_pdf, normal_cdf, normal_sf, normal_quantile, normal_upper_quantile
from .functions import (
    TargetKind,
    RangeTag,
    TargetFunction,
    make_target,
    eval_target,
    to_pm1,
    to_spec,
    target_from_spec,
    on_intervals,
    breakpoints,
)

__all__ = [
    'normal_pdf',
    'normal_cdf',
    'normal_sf',
    'normal_quantile',
    'normal_upper_quantile',
    'TargetKind',
    'RangeTag',
    'TargetFunction',
    'make_target',
    'eval_target',
    'to_pm1',
    'to_spec',
    'target_from_spec',
    'on_intervals',
    'breakpoints',
]
