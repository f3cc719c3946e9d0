import numpy as np
from scipy.special import erfc, ndtri

from errors import ParameterError

_SQRT2 = np.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


def normal_pdf(x):
    """标准正态密度 φ(x)"""
    x = np.asarray(x, dtype=float)
    return _INV_SQRT_2PI * np.exp(-0.5 * x * x)


def normal_cdf(x):
    """Φ(x)，用 erfc 计算以保留左尾的相对精度"""
    x = np.asarray(x, dtype=float)
    return 0.5 * erfc(-x / _SQRT2)


def normal_sf(x):
    """Φ̄(x) = 1 − Φ(x)"""
    x = np.asarray(x, dtype=float)
    return 0.5 * erfc(x / _SQRT2)


def normal_quantile(p: float) -> float:
    """Φ⁻¹(p)，ndtri 初值加两步 Newton 修正"""
    if not 0.0 < p < 1.0:
        raise ParameterError(f"分位数概率必须在 (0, 1) 内：{p}")
    x = float(ndtri(p))
    for _ in range(2):
        x -= (float(normal_cdf(x)) - p) / float(normal_pdf(x))
    return x


def normal_upper_quantile(p: float) -> float:
    """θ = Φ̄⁻¹(p)，满足 Pr[x > θ] = p"""
    if not 0.0 < p < 1.0:
        raise ParameterError(f"尾概率必须在 (0, 1) 内：{p}")
    if p == 0.5:
        return 0.0
    x = -float(ndtri(p))
    for _ in range(2):
        x += (float(normal_sf(x)) - p) / float(normal_pdf(x))
    return x
