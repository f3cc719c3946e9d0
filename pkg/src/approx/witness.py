import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from config.settings import (
    WITNESS_RESIDUAL_ORDER,
    CSQ_EXPANSION_DEGREE,
    CSQ_EXPANSION_ORDER,
)
from errors import DegenerateInputError, ParameterError, SolverError
from hermite import HermiteExpansion, expand, hermite_table
from quadrature import QuadratureRule, gauss_hermite_rule, grid_order
from targets import RangeTag, TargetFunction
from .lp import LinearProgram, LpStatus, solve_lp
from .polynomial import best_l1, grid_values, scaled_basis

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DualWitness:
    """对偶见证 g：网格上取值于 [−1, 1]，与低次 Hermite 多项式正交

    Attributes:
        nodes: 网格节点
        weights: 网格权重
        values: 节点处的取值 gᵢ
        correlation: 网格测度下的 E[f·g]
        moment_residual: max_{j<d} |E[g·H_j]|（网格测度）
        continuous_residual: 分段线性插值在 400 阶规则下的同一量
        degree: 消失矩的阶数 d
        target: 目标标识
    """

    nodes: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    correlation: float
    moment_residual: float
    continuous_residual: float
    degree: int
    target: str

    @property
    def dimension(self) -> int:
        return 1

    @property
    def rule_order(self) -> int:
        return self.nodes.size

    @property
    def opt(self) -> float:
        """植入实例的最优误差 ½(1 − E[fg])"""
        return 0.5 * (1.0 - self.correlation)

    @property
    def second_moment(self) -> float:
        """网格测度下的 E[g²]"""
        return float(np.sum(self.weights * self.values ** 2))

    def interpolant(self, x) -> np.ndarray:
        """分段线性插值，区间外取端点值，截断到 [−1, 1]"""
        x = np.asarray(x, dtype=float)
        return np.clip(np.interp(x, self.nodes, self.values), -1.0, 1.0)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 2:
            x = x[:, 0]
        return self.interpolant(x)

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "degree": self.degree,
            "rule_order": self.rule_order,
            "correlation": self.correlation,
            "moment_residual": self.moment_residual,
            "continuous_residual": self.continuous_residual,
            "nodes": self.nodes.tolist(),
            "values": self.values.tolist(),
        }


def _moment_residual(values: np.ndarray, rule: QuadratureRule, d: int) -> float:
    if d == 0:
        return 0.0
    moments = hermite_table(d - 1, rule.nodes, scale=rule.weights).T @ values
    return float(np.max(np.abs(moments)))


def _solve_witness(values: np.ndarray, rule: QuadratureRule, d: int, method: Optional[str]):
    # 约束行 Σ wᵢ H_j(xᵢ) gᵢ = Σ √wᵢ Q_ij gᵢ
    q = rule.order
    if d > 0:
        matrix = (scaled_basis(rule, d - 1) * rule.sqrt_weights[:, None]).T
    else:
        matrix = np.zeros((0, q))
    lp = LinearProgram(rule.weights * values, matrix, ["="] * d, np.zeros(d),
                       [(-1.0, 1.0)] * q, maximize=True)
    solution = solve_lp(lp, method)
    if solution.status != LpStatus.OPTIMAL:
        # g ≡ 0 总是可行，走到这里说明实现有误
        raise SolverError(f"见证线性规划未得到最优解：{solution.status.value}", solution.log)
    return np.clip(solution.x, -1.0, 1.0), solution.optimum


def _build_witness(f: TargetFunction, values: np.ndarray, rule: QuadratureRule, d: int,
                   method: Optional[str]) -> DualWitness:
    g, _optimum = _solve_witness(values, rule, d, method)
    check = gauss_hermite_rule(WITNESS_RESIDUAL_ORDER)
    interpolated = np.clip(np.interp(check.nodes, rule.nodes, g), -1.0, 1.0)
    return DualWitness(
        nodes=np.array(rule.nodes),
        weights=np.array(rule.weights),
        values=g,
        correlation=float(np.sum(rule.weights * values * g)),
        moment_residual=_moment_residual(g, rule, d),
        continuous_residual=_moment_residual(interpolated, check, d),
        degree=d,
        target=f.name,
    )


def dual_witness(f: TargetFunction, d: int, rule: Optional[QuadratureRule] = None,
                 method: Optional[str] = None) -> DualWitness:
    """求解网格见证线性规划 max Σ wᵢ fᵢ gᵢ，|gᵢ| ≤ 1，Σ wᵢ H_j(xᵢ) gᵢ = 0（j < d）

    Args:
        f: ±1 值的一维目标
        d: 消失矩阶数
        rule: 网格，缺省阶数 max(200, 4d)
        method: 线性规划方法

    Returns:
        DualWitness

    Raises:
        ParameterError: 目标不是一维 ±1 值函数
        SolverError: 线性规划失败
    """
    if f.range_tag != RangeTag.PM1:
        raise ParameterError(f"对偶见证需要 ±1 值目标：{f.name}")
    if d < 0:
        raise ParameterError(f"d 必须非负：{d}")
    rule = rule or gauss_hermite_rule(grid_order(d))
    values = grid_values(f, rule)
    witness = _build_witness(f, values, rule, d, method)
    logger.info("见证 %s d=%d：相关性 %.10f，矩残差 %.2e，连续残差 %.2e",
                f.name, d, witness.correlation, witness.moment_residual, witness.continuous_residual)
    return witness


def duality_gap(f: TargetFunction, d: int, rule: Optional[QuadratureRule] = None,
                method: Optional[str] = None) -> float:
    """|见证最优值 − (d−1) 次最佳 L1 误差|，两侧使用同一网格"""
    rule = rule or gauss_hermite_rule(grid_order(d))
    witness = dual_witness(f, d, rule, method)
    if d == 0:
        primal = float(np.sum(rule.weights * np.abs(grid_values(f, rule))))
    else:
        primal = best_l1(f, d - 1, rule, method, tie_break=False).error
    gap = abs(witness.correlation - primal)
    logger.info("对偶间隙 %s d=%d：%.3e", f.name, d, gap)
    return gap


@dataclass(frozen=True)
class RealWitnessReport:
    """实值目标的见证：optimum ≥ ε 时可行

    norm_below_epsilon 为真表示 ‖f‖₂ < ε，前提不成立，此时必然不可行。
    """

    witness: DualWitness
    optimum: float
    epsilon: float
    feasible: bool
    target_l2_norm: float
    norm_below_epsilon: bool = False

    def to_dict(self) -> dict:
        return {
            "optimum": self.optimum,
            "epsilon": self.epsilon,
            "feasible": self.feasible,
            "target_l2_norm": self.target_l2_norm,
            "norm_below_epsilon": self.norm_below_epsilon,
            "witness": self.witness.to_dict(),
        }


def dual_witness_real(f: TargetFunction, d: int, epsilon: float,
                      rule: Optional[QuadratureRule] = None,
                      method: Optional[str] = None) -> RealWitnessReport:
    """实值目标的见证线性规划，optimum 等于网格上的 min_P ‖f − P‖₁

    Returns:
        RealWitnessReport，optimum < ε 时 feasible 为 False；‖f‖₂ < ε 时另记 norm_below_epsilon
    """
    if epsilon <= 0:
        raise ParameterError(f"ε 必须为正：{epsilon}")
    rule = rule or gauss_hermite_rule(grid_order(d))
    values = grid_values(f, rule)
    norm = float(np.sqrt(np.sum(rule.weights * values ** 2)))
    norm_below = norm < epsilon
    if norm_below:
        logger.warning("%s 的 ‖f‖₂ = %.4g 小于 ε = %.4g，见证不可能可行", f.name, norm, epsilon)
    witness = _build_witness(f, values, rule, d, method)
    optimum = witness.correlation
    feasible = optimum >= epsilon and not norm_below
    logger.info("实值见证 %s d=%d：最优值 %.8f，ε=%.4g，%s", f.name, d, optimum, epsilon,
                "可行" if feasible else "不可行")
    return RealWitnessReport(witness, optimum, epsilon, feasible, norm, norm_below)


@dataclass(frozen=True)
class CsqHardFunction:
    """G = C·g，g = f − Σ_{i<d} f^[i]，C = 2/(ε‖g‖₂)"""

    G: HermiteExpansion
    scale: float
    tail_norm: float
    degree: int
    epsilon: float

    def to_dict(self) -> dict:
        return {
            "scale": self.scale,
            "tail_norm": self.tail_norm,
            "degree": self.degree,
            "epsilon": self.epsilon,
            "G": self.G.to_dict(),
        }


def csq_hard_function(f: Union[TargetFunction, HermiteExpansion], d: int, epsilon: float,
                      max_degree: int = CSQ_EXPANSION_DEGREE,
                      rule: Optional[QuadratureRule] = None) -> CsqHardFunction:
    """构造 CSQ 困难函数

    目标以 Hermite 展开给出时直接使用；否则展开到 max_degree 次，
    尾部 g 只含 d..max_degree 次的项。

    Raises:
        DegenerateInputError: 尾部为零
    """
    if epsilon <= 0:
        raise ParameterError(f"ε 必须为正：{epsilon}")
    if isinstance(f, HermiteExpansion):
        e = f
    else:
        if max_degree < d:
            raise ParameterError(f"展开次数 {max_degree} 小于 d={d}")
        rule = rule or gauss_hermite_rule(max(CSQ_EXPANSION_ORDER, max_degree + 5))
        e = expand(f, f.dimension, max_degree, rule)
    tail = e.tail_from(d)
    tail_norm = tail.l2_norm()
    if tail_norm < 1e-12:
        raise DegenerateInputError(f"d={d} 以上的 Hermite 尾部为零，无法构造困难函数")
    if tail_norm < epsilon:
        logger.warning("‖g‖₂ = %.4g 小于 ε = %.4g", tail_norm, epsilon)
    scale = 2.0 / (epsilon * tail_norm)
    return CsqHardFunction(tail.scaled(scale), scale, tail_norm, d, epsilon)
