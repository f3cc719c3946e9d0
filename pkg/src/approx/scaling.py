import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy.stats import linregress

from config.settings import DEGREE_SCAN_MAX
from errors import AnalysisError, ParameterError
from quadrature import QuadratureRule
from targets import TargetFunction
from .polynomial import min_degree

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScalingFit:
    """最小次数对 ε 的拟合

    slope/intercept/r_squared: log d 对 log(1/ε) 的最小二乘拟合
    log2_slope/log2_intercept/log2_r_squared: d 对 log²(1/ε) 的线性拟合
    """

    epsilons: List[float]
    degrees: List[int]
    slope: float
    intercept: float
    r_squared: float
    log2_slope: float
    log2_intercept: float
    log2_r_squared: float

    @property
    def loglog_slope(self) -> float:
        """log d 对 log ε 的斜率（取负号后的 slope）"""
        return -self.slope

    def to_dict(self) -> dict:
        return {
            "epsilons": self.epsilons,
            "degrees": self.degrees,
            "slope": self.slope,
            "loglog_slope": self.loglog_slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "log2_slope": self.log2_slope,
            "log2_intercept": self.log2_intercept,
            "log2_r_squared": self.log2_r_squared,
        }


def fit_scaling(epsilons: Sequence[float], degrees: Sequence[int]) -> ScalingFit:
    """对给定的 (ε, d) 数据做两种拟合

    Raises:
        ParameterError: ε 少于 4 个或跨度不足 4 倍
        AnalysisError: 所有次数相同，拟合退化
    """
    eps = np.asarray(epsilons, dtype=float)
    deg = np.asarray(degrees, dtype=float)
    if eps.size != deg.size:
        raise ParameterError(f"ε 与次数个数不一致：{eps.size} 与 {deg.size}")
    if eps.size < 4 or np.any(eps <= 0) or eps.max() / eps.min() < 4:
        raise ParameterError(f"拟合需要至少 4 个跨度不小于 4 倍的正 ε：{eps.tolist()}")
    if np.all(deg == deg[0]):
        raise AnalysisError(f"所有次数都等于 {deg[0]:g}，拟合退化")

    log_inv = np.log(1.0 / eps)
    squared = linregress(log_inv ** 2, deg)
    if np.all(deg > 0):
        loglog = linregress(log_inv, np.log(deg))
        slope, intercept, r_squared = float(loglog.slope), float(loglog.intercept), float(loglog.rvalue ** 2)
    else:
        logger.warning("次数中含 0，跳过对数拟合：%s", deg.tolist())
        slope = intercept = r_squared = float("nan")
    return ScalingFit(
        epsilons=eps.tolist(),
        degrees=[int(d) for d in deg],
        slope=slope,
        intercept=intercept,
        r_squared=r_squared,
        log2_slope=float(squared.slope),
        log2_intercept=float(squared.intercept),
        log2_r_squared=float(squared.rvalue ** 2),
    )


def scaling_fit(target: TargetFunction, norm: str, epsilons: Sequence[float],
                d_max: int = DEGREE_SCAN_MAX, rule: Optional[QuadratureRule] = None,
                method: Optional[str] = None) -> ScalingFit:
    """逐个 ε 计算最小次数并拟合标度律"""
    degrees = [min_degree(target, eps, norm, d_max, rule, method) for eps in epsilons]
    if any(d > d_max for d in degrees):
        logger.warning("%s 的部分 ε 达到哨兵次数 %d，拟合结果偏低", target.name, d_max + 1)
    fit = fit_scaling(epsilons, degrees)
    logger.info("%s %s 标度拟合：斜率 %.4f（R²=%.4f），log² 斜率 %.4f（R²=%.4f）",
                target.name, norm, fit.slope, fit.r_squared, fit.log2_slope, fit.log2_r_squared)
    return fit
