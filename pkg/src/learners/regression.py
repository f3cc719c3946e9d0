import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from config.settings import LEARNER_MAX_BASIS, LEARNER_SAMPLES_PER_BASIS, RIDGE
from errors import ParameterError, ResourceError, SolverError
from frames import OrthonormalFrame
from hermite import HermiteExpansion, hermite_table, multi_indices
from approx import LinearProgram, LpStatus, solve_lp

logger = logging.getLogger(__name__)

Samples = Tuple[np.ndarray, np.ndarray]

# L1 损失与对偶最优值的相对一致性容差
LOSS_MATCH_TOLERANCE = 1e-6


@dataclass(frozen=True)
class PolynomialHypothesis:
    """Hermite 基下的多项式假设

    Attributes:
        expansion: 特征坐标上的 Hermite 展开
        feature_map: 可选的特征标架，特征为 P x；None 表示直接使用环境坐标
        threshold: 布尔模式的阈值 θ，输出 sign(p(x) − θ)
        boolean: 是否为布尔模式
    """

    expansion: HermiteExpansion
    feature_map: Optional[OrthonormalFrame] = None
    threshold: Optional[float] = None
    boolean: bool = False

    def __post_init__(self):
        if self.boolean and self.threshold is None:
            raise ParameterError("布尔模式的假设必须给出阈值")
        if self.feature_map is not None and self.feature_map.m != self.expansion.m:
            raise ParameterError(f"特征维数 {self.feature_map.m} 与展开维数 {self.expansion.m} 不一致")

    @property
    def degree(self) -> int:
        return self.expansion.max_degree

    def features(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[None, :] if self.feature_map is not None or self.expansion.m > 1 else x[:, None]
        if self.feature_map is not None:
            return self.feature_map.project(x)
        return x

    def polynomial(self, x) -> np.ndarray:
        """多项式部分 p(x)"""
        return self.expansion.evaluate(self.features(x))

    def predict(self, x) -> np.ndarray:
        values = self.polynomial(x)
        if not self.boolean:
            return values
        return np.where(values - self.threshold >= 0.0, 1.0, -1.0)

    def __call__(self, x) -> np.ndarray:
        return self.predict(x)

    def with_threshold(self, threshold: float) -> "PolynomialHypothesis":
        return PolynomialHypothesis(self.expansion, self.feature_map, float(threshold), True)


def _split(samples: Samples) -> Tuple[np.ndarray, np.ndarray]:
    x, y = samples
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] != y.size:
        raise ParameterError(f"样本点数 {x.shape[0]} 与标签数 {y.size} 不一致")
    return x, y


def design_matrix(features: np.ndarray, degree: int) -> np.ndarray:
    """Φ[i, J] = H_J(zᵢ)，列按分次字典序排列

    Raises:
        ResourceError: 基函数个数超过上限
    """
    features = np.asarray(features, dtype=float)
    k = features.shape[1]
    basis = multi_indices(k, degree)
    if len(basis) > LEARNER_MAX_BASIS:
        raise ResourceError(
            f"基函数个数 {len(basis)} 超过上限 {LEARNER_MAX_BASIS}，请提供特征标架降低维数",
            {"basis": len(basis), "limit": LEARNER_MAX_BASIS, "features": k, "degree": degree})
    tables = [hermite_table(degree, features[:, i]) for i in range(k)]
    phi = np.ones((features.shape[0], len(basis)))
    for col, J in enumerate(basis):
        for i, j in enumerate(J.entries):
            if j:
                phi[:, col] *= tables[i][:, j]
    return phi


def _prepare(samples: Samples, degree: int, feature_map: Optional[OrthonormalFrame]):
    if degree < 0:
        raise ParameterError(f"次数必须非负：{degree}")
    x, y = _split(samples)
    features = feature_map.project(x) if feature_map is not None else x
    phi = design_matrix(features, degree)
    needed = LEARNER_SAMPLES_PER_BASIS * phi.shape[1]
    if y.size < needed:
        raise ParameterError(f"样本数 {y.size} 不足：{phi.shape[1]} 个基函数至少需要 {needed} 个样本",
                             {"samples": int(y.size), "basis": phi.shape[1]})
    return features, y, phi


def _hypothesis(coefficients: np.ndarray, k: int, degree: int,
                feature_map: Optional[OrthonormalFrame]) -> PolynomialHypothesis:
    basis = multi_indices(k, degree)
    expansion = HermiteExpansion(k, degree, {J: float(c) for J, c in zip(basis, coefficients)})
    return PolynomialHypothesis(expansion, feature_map)


def l1_regression(samples: Samples, degree: int, feature_map: Optional[OrthonormalFrame] = None,
                  method: Optional[str] = None) -> PolynomialHypothesis:
    """最小化 Σ |p(xᵢ) − yᵢ| 的 Hermite 多项式

    求解对偶线性规划 max yᵀa，Φᵀa = 0，|aᵢ| ≤ 1，系数取等式约束的对偶值，
    再用原始损失核对；变量数等于样本数，约束数等于基函数个数。

    Args:
        samples: (x, y)，x 形状 (N, n)
        degree: 总次数上限
        feature_map: 特征标架，缺省为环境坐标
        method: 线性规划后端

    Returns:
        PolynomialHypothesis（实值模式）

    Raises:
        ParameterError: 样本不足
        ResourceError: 基函数或线性规划规模超限
        SolverError: 对偶值与原始损失不一致
    """
    features, y, phi = _prepare(samples, degree, feature_map)
    n, width = phi.shape
    lp = LinearProgram(y, phi.T, ["="] * width, np.zeros(width),
                       [(-1.0, 1.0)] * n, maximize=True)
    solution = solve_lp(lp, method)
    if solution.status != LpStatus.OPTIMAL:
        raise SolverError(f"L1 回归对偶问题未得到最优解：{solution.status.value}", solution.log)

    scale = max(1.0, abs(solution.optimum))
    for sign in (1.0, -1.0):
        coefficients = sign * solution.duals
        loss = float(np.sum(np.abs(y - phi @ coefficients)))
        if abs(loss - solution.optimum) <= LOSS_MATCH_TOLERANCE * scale:
            logger.info("L1 回归 d=%d：%d 个样本，%d 个基函数，平均损失 %.6f",
                        degree, n, width, loss / n)
            return _hypothesis(coefficients, features.shape[1], degree, feature_map)
    raise SolverError(f"L1 回归对偶值无法还原原始解（对偶最优 {solution.optimum:.6e}）",
                      solution.log, {"dual_optimum": solution.optimum})


def l1_loss(h: PolynomialHypothesis, samples: Samples) -> float:
    """平均经验 L1 损失"""
    x, y = _split(samples)
    return float(np.mean(np.abs(h.polynomial(x) - y)))


def threshold_hypothesis(h: PolynomialHypothesis, samples: Samples) -> PolynomialHypothesis:
    """在 p(xᵢ) 的相邻中点（及两端哨兵）中选取经验误分类率最小的阈值

    并列时取最小的阈值。
    """
    x, y = _split(samples)
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ParameterError("阈值化需要 ±1 标签")
    values = h.polynomial(x)
    order = np.argsort(values, kind="stable")
    v, labels = values[order], y[order]
    distinct = np.flatnonzero(np.diff(v) > 0)
    candidates = np.concatenate([[v[0] - 1.0], 0.5 * (v[distinct] + v[distinct + 1]), [v[-1] + 1.0]])

    # 阈值位于第 k 个与第 k+1 个值之间时，前 k+1 个判为 −1，其余判为 +1
    positive_prefix = np.cumsum(labels > 0)
    negative_total = int(np.sum(labels < 0))
    negative_prefix = np.cumsum(labels < 0)
    split_errors = positive_prefix[distinct] + (negative_total - negative_prefix[distinct])
    errors = np.concatenate([[negative_total], split_errors, [int(np.sum(labels > 0))]])
    best = int(np.argmin(errors))
    logger.info("阈值 θ=%.6f，经验误分类率 %.4f", candidates[best], errors[best] / y.size)
    return h.with_threshold(candidates[best])


def l2_regression(samples: Samples, degree: int,
                  feature_map: Optional[OrthonormalFrame] = None) -> PolynomialHypothesis:
    """带 1e−10 岭项的正规方程最小二乘"""
    features, y, phi = _prepare(samples, degree, feature_map)
    n = y.size
    gram = phi.T @ phi / n
    gram[np.diag_indices_from(gram)] += RIDGE
    rhs = phi.T @ y / n
    try:
        coefficients = linalg.solve(gram, rhs, assume_a="pos")
    except linalg.LinAlgError:
        coefficients = linalg.lstsq(gram, rhs)[0]
    residual = float(np.sqrt(np.mean((y - phi @ coefficients) ** 2)))
    logger.info("L2 回归 d=%d：%d 个样本，%d 个基函数，均方根残差 %.6f",
                degree, n, phi.shape[1], residual)
    return _hypothesis(coefficients, features.shape[1], degree, feature_map)
