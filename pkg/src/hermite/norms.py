import logging
from dataclasses import dataclass
from itertools import product
from math import comb, factorial
from typing import Dict, Optional

import numpy as np

from config.settings import HARMONIC_FD_STEP
from errors import ParameterError
from quadrature import QuadratureRule, expect, tensor_expect
from .expansion import HermiteExpansion
from .multi_index import MultiIndex, multi_indices

logger = logging.getLogger(__name__)


def lp_norm(e: HermiteExpansion, power: float, rule: QuadratureRule) -> float:
    """‖p‖_q = (E|p|^q)^{1/q}，q ≥ 1，由求积计算"""
    if power < 1:
        raise ParameterError(f"范数阶数必须不小于 1：{power}")
    if e.m == 1:
        value = expect(rule, lambda x: np.abs(e.evaluate(x)) ** power)
    else:
        value = tensor_expect(rule, e.m, lambda x: np.abs(e.evaluate(x)) ** power)
    return float(max(value, 0.0) ** (1.0 / power))


@dataclass(frozen=True)
class HypercontractiveReport:
    """超压缩链 ‖p‖₄ ≤ 3^{d/2}‖p‖₂ 与插值 ‖p‖₂ ≤ ‖p‖₁^{1/3}‖p‖₄^{2/3} 的数值结果"""

    degree: int
    l1: float
    l2: float
    l4: float
    hypercontractive_holds: bool
    interpolation_holds: bool
    l1_lower_bound_holds: bool

    @property
    def holds(self) -> bool:
        return self.hypercontractive_holds and self.interpolation_holds and self.l1_lower_bound_holds


def hypercontractive_chain(e: HermiteExpansion, rule: QuadratureRule,
                           tolerance: float = 1e-8) -> HypercontractiveReport:
    """检查由超压缩不等式与范数插值组合出的 ‖p‖₄ ≤ 3^{3d/2}‖p‖₁

    Args:
        e: 多项式展开，d 取实际存储的最高次数
        rule: 一维求积规则
        tolerance: 加性容差

    Returns:
        HypercontractiveReport
    """
    d = max(e.stored_degree, 0)
    l1 = lp_norm(e, 1, rule)
    l2 = e.l2_norm()
    l4 = lp_norm(e, 4, rule)
    report = HypercontractiveReport(
        degree=d,
        l1=l1,
        l2=l2,
        l4=l4,
        hypercontractive_holds=l4 <= 3.0 ** (d / 2.0) * l2 + tolerance,
        interpolation_holds=l2 <= l1 ** (1.0 / 3.0) * l4 ** (2.0 / 3.0) + tolerance,
        l1_lower_bound_holds=l4 <= 3.0 ** (1.5 * d) * l1 + tolerance,
    )
    if not report.holds:
        logger.warning("超压缩链未成立：d=%d, ‖p‖₁=%.6g, ‖p‖₂=%.6g, ‖p‖₄=%.6g", d, l1, l2, l4)
    return report


def derivative_tensor(e: HermiteExpansion, k: int, at: Optional[np.ndarray] = None,
                      step: Optional[float] = None) -> Dict[MultiIndex, float]:
    """k 阶偏导数 ∂^α p(at)，|α| = k，用中心差分计算

    每个坐标上的 a 阶中心差分对 a 次单项式精确，因此对次数不超过 k 的多项式
    混合差分也精确，步长只影响舍入误差。

    Args:
        e: 多项式展开
        k: 导数阶数
        at: 求导点，默认原点
        step: 差分步长，默认 HARMONIC_FD_STEP

    Returns:
        按分级字典序排列的 α → ∂^α p
    """
    if k < 0:
        raise ParameterError(f"导数阶数必须非负：{k}")
    h = HARMONIC_FD_STEP if step is None else step
    center = np.zeros(e.m) if at is None else np.asarray(at, dtype=float)
    result = {}
    for alpha in multi_indices(e.m, k):
        if alpha.total_degree != k:
            continue
        stencils = []
        for a in alpha.entries:
            offsets = [(a / 2.0 - r) * h for r in range(a + 1)]
            weights = [(-1) ** r * comb(a, r) for r in range(a + 1)]
            stencils.append(list(zip(offsets, weights)))
        points = []
        coefficients = []
        for combo in product(*stencils):
            points.append(center + np.array([o for o, _ in combo]))
            coefficients.append(np.prod([w for _, w in combo]))
        values = e.evaluate(np.array(points))
        result[alpha] = float(np.dot(coefficients, values) / h ** k)
    return result


def harmonic_inner_product(p: HermiteExpansion, q: HermiteExpansion, k: int,
                           step: Optional[float] = None) -> float:
    """k 阶导数张量的内积 Σ_{i₁..i_k} ∂_{i₁..i_k}p·∂_{i₁..i_k}q

    对 k 次齐次 Hermite 多项式，它等于 k!·E[p q]。
    """
    if p.m != q.m:
        raise ParameterError(f"展开维数不一致：{p.m} 与 {q.m}")
    dp = derivative_tensor(p, k, step=step)
    dq = derivative_tensor(q, k, step=step)
    total = 0.0
    for alpha, value in dp.items():
        multinomial = factorial(k)
        for a in alpha.entries:
            multinomial //= factorial(a)
        total += multinomial * value * dq[alpha]
    return total
