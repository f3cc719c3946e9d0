import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Union

import numpy as np
from scipy import sparse
from scipy.integrate import quad

from config.settings import DEGREE_SCAN_MAX
from errors import EvaluationError, ParameterError, SolverError
from hermite import HermiteExpansion, expand, hermite_table
from quadrature import QuadratureRule, expect, gauss_hermite_rule, grid_order, tensor_expect
from targets import TargetFunction, breakpoints as target_breakpoints, normal_pdf
from .lp import LinearProgram, LpStatus, solve_lp

logger = logging.getLogger(__name__)

NORMS = ("L1", "L2")


@dataclass(frozen=True)
class ApproxResult:
    """最佳多项式逼近结果"""

    polynomial: HermiteExpansion
    error: float
    degree: int
    norm: str
    rule_order: int

    def to_dict(self) -> dict:
        return {
            "norm": self.norm,
            "degree": self.degree,
            "error": self.error,
            "rule_order": self.rule_order,
            "polynomial": self.polynomial.to_dict(),
        }


def _normalize_norm(norm: str) -> str:
    norm = str(norm).upper()
    if norm not in NORMS:
        raise ParameterError(f"未知的范数：{norm}，可选 {NORMS}")
    return norm


def grid_values(f: Callable, rule: QuadratureRule) -> np.ndarray:
    """一维目标在求积节点上的取值"""
    if getattr(f, "dimension", 1) != 1:
        raise ParameterError(f"网格线性规划只支持一维目标：维数 {f.dimension}")
    values = np.asarray(f(rule.nodes[:, None]), dtype=float).reshape(-1)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise EvaluationError(f"目标在节点处取非有限值：x={rule.nodes[bad[0]]}")
    return values


def scaled_basis(rule: QuadratureRule, degree: int) -> np.ndarray:
    """Q_ij = √wᵢ·H_j(xᵢ)，各列在网格上正交归一且有界"""
    return hermite_table(degree, rule.nodes, scale=rule.sqrt_weights)


def _expectation(f: Callable, m: int, rule: QuadratureRule) -> float:
    if m == 1:
        return expect(rule, lambda x: f(np.asarray(x)[:, None]))
    return tensor_expect(rule, m, f)


def best_l2(f: TargetFunction, d: int, rule: Optional[QuadratureRule] = None) -> ApproxResult:
    """最佳 L2 逼近：截断的 Hermite 展开

    Args:
        f: 目标，维数不超过 4
        d: 次数
        rule: 一维求积规则，阶数至少 d + 5

    Returns:
        ApproxResult，误差为 √(E[f²] − Σ f̂(J)²)，下限截为 0

    Raises:
        ParameterError: 求积规则过粗
    """
    if d < 0:
        raise ParameterError(f"次数必须非负：{d}")
    rule = rule or gauss_hermite_rule(grid_order(d))
    m = f.dimension
    e = expand(f, m, d, rule)
    second_moment = _expectation(lambda x: f(x) ** 2, m, rule)
    error = float(np.sqrt(max(second_moment - e.l2_norm() ** 2, 0.0)))
    return ApproxResult(e, error, d, "L2", rule.order)


def _l1_program(values: np.ndarray, rule: QuadratureRule, d: int) -> LinearProgram:
    # 缩放残差形式：Q c + r⁺ − r⁻ = √w f，目标 Σ √wᵢ (r⁺ᵢ + r⁻ᵢ)
    q = rule.order
    Q = scaled_basis(rule, d)
    sqrt_w = rule.sqrt_weights
    identity = sparse.identity(q, format="csr")
    matrix = sparse.hstack([sparse.csr_matrix(Q), identity, -identity], format="csr")
    objective = np.concatenate([np.zeros(d + 1), sqrt_w, sqrt_w])
    bounds = [(None, None)] * (d + 1) + [(0.0, None)] * (2 * q)
    return LinearProgram(objective, matrix, ["="] * q, sqrt_w * values, bounds)


def _tie_break(values: np.ndarray, rule: QuadratureRule, d: int, optimum: float,
               method: Optional[str]) -> Optional[np.ndarray]:
    """在所有最优解中取 ‖c‖₁ 最小者"""
    q = rule.order
    Q = sparse.csr_matrix(scaled_basis(rule, d))
    sqrt_w = rule.sqrt_weights
    identity = sparse.identity(q, format="csr")
    equality = sparse.hstack([Q, -Q, identity, -identity], format="csr")
    budget = sparse.csr_matrix(np.concatenate([np.zeros(2 * (d + 1)), sqrt_w, sqrt_w])[None, :])
    matrix = sparse.vstack([equality, budget], format="csr")
    objective = np.concatenate([np.ones(2 * (d + 1)), np.zeros(2 * q)])
    rhs = np.concatenate([sqrt_w * values, [optimum * (1.0 + 1e-9) + 1e-12]])
    lp = LinearProgram(objective, matrix, ["="] * q + ["<="], rhs)
    solution = solve_lp(lp, method)
    if not solution.is_optimal:
        logger.warning("L1 逼近的次级最小化失败（%s），保留原解", solution.status.value)
        return None
    return solution.x[:d + 1] - solution.x[d + 1:2 * (d + 1)]


def best_l1(f: TargetFunction, d: int, rule: Optional[QuadratureRule] = None,
            method: Optional[str] = None, tie_break: bool = True) -> ApproxResult:
    """网格测度下的最佳 L1 逼近

    Args:
        f: 一维目标
        d: 次数
        rule: 求积规则，阶数至少 max(200, 4d)
        method: 线性规划方法
        tie_break: 是否在最优解中再取系数 ℓ₁ 范数最小者

    Returns:
        ApproxResult，误差为网格测度下的 Σ wᵢ|f(xᵢ) − p(xᵢ)|

    Raises:
        ParameterError: 规则过粗或目标维数不为 1
        SolverError: 线性规划失败
    """
    if d < 0:
        raise ParameterError(f"次数必须非负：{d}")
    rule = rule or gauss_hermite_rule(grid_order(d))
    if rule.order < grid_order(d):
        raise ParameterError(f"求积阶数 {rule.order} 过小，L1 逼近至少需要 {grid_order(d)}")
    values = grid_values(f, rule)
    solution = solve_lp(_l1_program(values, rule, d), method)
    if solution.status != LpStatus.OPTIMAL:
        raise SolverError(f"L1 逼近线性规划未得到最优解：{solution.status.value}", solution.log)
    coefficients = solution.x[:d + 1]
    if tie_break:
        refined = _tie_break(values, rule, d, solution.optimum, method)
        if refined is not None:
            coefficients = refined
    p = HermiteExpansion.univariate(coefficients)
    fitted = scaled_basis(rule, d) @ coefficients
    error = float(np.sum(rule.sqrt_weights * np.abs(rule.sqrt_weights * values - fitted)))
    return ApproxResult(p, error, d, "L1", rule.order)


def degree_profile(f: TargetFunction, norm: str, d_max: int,
                   rule: Optional[QuadratureRule] = None, method: Optional[str] = None,
                   stop_below: Optional[float] = None) -> List[float]:
    """d = 0..d_max 的最佳逼近误差；给定 stop_below 时在误差首次 < stop_below 处停止"""
    norm = _normalize_norm(norm)
    if d_max > DEGREE_SCAN_MAX:
        raise ParameterError(f"d_max 不能超过 {DEGREE_SCAN_MAX}：{d_max}")
    rule = rule or gauss_hermite_rule(grid_order(d_max))
    errors: List[float] = []
    if norm == "L2":
        m = f.dimension
        e = expand(f, m, d_max, rule)
        second_moment = _expectation(lambda x: f(x) ** 2, m, rule)
        by_degree = np.zeros(d_max + 1)
        for J, c in e.items():
            by_degree[J.total_degree] += c * c
        residual = second_moment - np.cumsum(by_degree)
        for value in residual:
            errors.append(float(np.sqrt(max(value, 0.0))))
            if stop_below is not None and errors[-1] < stop_below:
                break
        return errors
    for d in range(d_max + 1):
        errors.append(best_l1(f, d, rule, method, tie_break=False).error)
        if stop_below is not None and errors[-1] < stop_below:
            break
    return errors


def min_degree(f: TargetFunction, epsilon: float, norm: str, d_max: int = DEGREE_SCAN_MAX,
               rule: Optional[QuadratureRule] = None, method: Optional[str] = None) -> int:
    """误差严格小于 ε 的最小次数，向上线性扫描

    Returns:
        最小次数；d_max 内达不到时返回 d_max + 1
    """
    if epsilon <= 0:
        raise ParameterError(f"ε 必须为正：{epsilon}")
    errors = degree_profile(f, norm, d_max, rule, method, stop_below=epsilon)
    for d, error in enumerate(errors):
        if error < epsilon:
            return d
    logger.warning("%s 在 d ≤ %d 内未达到 %s 误差 %.4g，返回哨兵值", f.name, d_max, norm, epsilon)
    return d_max + 1


def lp_error(f: Callable, p: HermiteExpansion, power: float, rule: QuadratureRule) -> float:
    """网格上的 L_q 误差 (E|f − p|^q)^{1/q}"""
    if power < 1:
        raise ParameterError(f"范数阶数必须不小于 1：{power}")
    if p.m == 1:
        values = grid_values(f, rule)
        total = float(np.sum(rule.weights * np.abs(values - p.evaluate(rule.nodes)) ** power))
    else:
        total = tensor_expect(rule, p.m, lambda x: np.abs(f(x) - p.evaluate(x)) ** power)
    return total ** (1.0 / power)


def continuous_l1_error(f: Callable, p: HermiteExpansion,
                        breakpoints: Optional[Sequence[float]] = None,
                        half_width: float = 12.0, panel: float = 0.25) -> float:
    """真实高斯测度下的 E|f − p|，在不光滑点与等宽面板上分段积分

    Args:
        f: 一维目标
        p: 一维多项式
        breakpoints: 目标的不光滑点，缺省从目标种类推断
        half_width: 有限积分区间 [−L, L] 的半宽，区间外用无穷积分补足
        panel: 面板宽度

    Returns:
        连续 L1 误差
    """
    if p.m != 1:
        raise ParameterError("连续 L1 误差只支持一维多项式")
    if breakpoints is None:
        breakpoints = target_breakpoints(f) if isinstance(f, TargetFunction) else []

    def integrand(x: float) -> float:
        point = np.array([[x]])
        return abs(float(np.asarray(f(point)).reshape(-1)[0]) - float(p.evaluate(point)[0])) * float(normal_pdf(x))

    knots = set(np.arange(-half_width, half_width + panel / 2, panel).tolist())
    knots.update(b for b in breakpoints if -half_width < b < half_width)
    knots = sorted(knots)
    total = 0.0
    for lo, hi in zip(knots[:-1], knots[1:]):
        total += quad(integrand, lo, hi, limit=200)[0]
    total += quad(integrand, -np.inf, -half_width, limit=200)[0]
    total += quad(integrand, half_width, np.inf, limit=200)[0]
    return total
