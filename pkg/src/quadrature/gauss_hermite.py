import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal

from config.settings import (
    QUADRATURE_MAX_ORDER,
    TENSOR_GRID_LIMIT,
    TENSOR_MAX_DIMENSION,
    GRID_MIN_ORDER,
    GRID_ORDER_PER_DEGREE,
)
from errors import EvaluationError, ParameterError, ResourceError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuadratureRule:
    """标准高斯测度下的求积规则

    Attributes:
        nodes: 递增且关于 0 对称的节点
        weights: 严格为正、和为 1 的概率权重
        order: 节点个数，对次数不超过 2*order-1 的多项式精确
    """

    nodes: np.ndarray
    weights: np.ndarray
    order: int

    @property
    def sqrt_weights(self) -> np.ndarray:
        return np.sqrt(self.weights)


def grid_order(degree: int) -> int:
    """近似问题使用的网格阶数 max(200, 4d)"""
    return max(GRID_MIN_ORDER, GRID_ORDER_PER_DEGREE * int(degree))


_RESCALE = 1e150
_LOG_RESCALE = np.log(_RESCALE)


def _scaled_hermite_pair(n: int, x: np.ndarray):
    """带缩放的归一化 Hermite 递推

    Returns:
        (H_{n-1}, H_n, log_scale)，真实值为返回值乘以 exp(log_scale)
    """
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    log_scale = np.zeros_like(x)
    for k in range(n):
        prev, cur = cur, (x * cur - np.sqrt(k) * prev) / np.sqrt(k + 1)
        big = np.abs(cur) > _RESCALE
        if np.any(big):
            prev[big] /= _RESCALE
            cur[big] /= _RESCALE
            log_scale[big] += _LOG_RESCALE
    return prev, cur, log_scale


@lru_cache(maxsize=32)
def _cached_rule(order: int) -> QuadratureRule:
    if order == 1:
        nodes = np.zeros(1)
        weights = np.ones(1)
    else:
        # Golub–Welsch：Jacobi 矩阵对角为 0，次对角为 √k
        nodes = eigh_tridiagonal(np.zeros(order), np.sqrt(np.arange(1, order, dtype=float)),
                                 eigvals_only=True)
        for _ in range(2):
            h_prev, h_cur, _scale = _scaled_hermite_pair(order, nodes)
            nodes = nodes - h_cur / (np.sqrt(order) * h_prev)
        # Christoffel 数 wᵢ = 1 / (n·H_{n-1}(xᵢ)²)，在对数域计算避免溢出
        h_prev, _h_cur, log_scale = _scaled_hermite_pair(order, nodes)
        log_w = -np.log(order) - 2.0 * (np.log(np.abs(h_prev)) + log_scale)
        weights = np.exp(log_w - np.max(log_w))
        weights = np.maximum(weights / np.sum(weights), np.finfo(float).tiny)
        nodes = np.sort(nodes)

    # 对称化，消除舍入带来的不对称
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    weights = weights / np.sum(weights)

    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes=nodes, weights=weights, order=order)


def gauss_hermite_rule(order: int) -> QuadratureRule:
    """构造概率论约定下的 Gauss–Hermite 求积规则

    Args:
        order: 节点个数，1 ≤ order ≤ 1000

    Returns:
        对次数不超过 2*order-1 的多项式精确的求积规则

    Raises:
        ParameterError: 阶数越界
    """
    if not isinstance(order, (int, np.integer)) or not 1 <= order <= QUADRATURE_MAX_ORDER:
        raise ParameterError(f"求积阶数必须在 1..{QUADRATURE_MAX_ORDER} 之间：{order}")
    return _cached_rule(int(order))


def evaluate_points(f: Callable, points: np.ndarray) -> np.ndarray:
    """在一批点上求值，优先向量化调用，失败时逐点求值

    Args:
        f: 被求值函数
        points: (N,) 或 (N, m) 点阵

    Returns:
        形状 (N,) 的取值
    """
    n = points.shape[0]
    try:
        values = np.asarray(f(points), dtype=float)
        if values.shape == (n, 1):
            values = values[:, 0]
        if values.shape == (n,):
            return values
    except (TypeError, ValueError, IndexError):
        pass
    return np.array([float(np.asarray(f(p), dtype=float).reshape(-1)[0]) for p in points], dtype=float)


def _check_finite(values: np.ndarray, points: np.ndarray):
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        node = points[bad[0]]
        raise EvaluationError(f"被积函数在节点处取非有限值：x={node}",
                              {"node": np.atleast_1d(node).tolist()})


def expect(rule: QuadratureRule, f: Callable) -> float:
    """计算 Σ wᵢ f(xᵢ)

    Args:
        rule: 求积规则
        f: 一元函数，接受节点数组并返回同形状数组（也接受逐点函数）

    Returns:
        高斯期望的求积近似

    Raises:
        EvaluationError: 某个节点处取值非有限
    """
    values = evaluate_points(f, rule.nodes)
    _check_finite(values, rule.nodes)
    return float(np.sum(rule.weights * values))


def tensor_points(rule: QuadratureRule, m: int):
    """返回张量积网格的点 (order^m, m) 与权重"""
    if m < 1 or m > TENSOR_MAX_DIMENSION:
        raise ParameterError(f"张量积求积只支持 1..{TENSOR_MAX_DIMENSION} 维：{m}")
    size = rule.order ** m
    if size > TENSOR_GRID_LIMIT:
        raise ResourceError(
            f"张量网格过大（{size} 个点），请改用 Monte Carlo（mc_expect）",
            {"grid_size": size, "limit": TENSOR_GRID_LIMIT})
    grids = np.meshgrid(*([rule.nodes] * m), indexing="ij")
    points = np.stack([g.ravel() for g in grids], axis=1)
    wgrids = np.meshgrid(*([rule.weights] * m), indexing="ij")
    weights = np.prod(np.stack([w.ravel() for w in wgrids], axis=1), axis=1)
    return points, weights


def tensor_expect(rule: QuadratureRule, m: int, f: Callable) -> float:
    """用张量积网格计算 m 维标准高斯下的期望

    Args:
        rule: 一维求积规则
        m: 维数，不超过 4
        f: 接受 (N, m) 点阵、返回 (N,) 的函数

    Returns:
        期望值

    Raises:
        ParameterError: 维数越界
        ResourceError: 网格点数超过上限
        EvaluationError: 非有限取值
    """
    points, weights = tensor_points(rule, m)
    values = evaluate_points(f, points)
    _check_finite(values, points)
    return float(np.sum(weights * values))
