import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from errors import ParameterError
from frames import OrthonormalFrame
from learners import PolynomialHypothesis, l1_regression, l2_regression, threshold_hypothesis
from .distributions import LabeledDistribution, RealScaledLabels
from .oracle import Adversary, OracleMode, StatOracle, correlation_query

logger = logging.getLogger(__name__)


class Verdict(str, Enum):
    PLANTED = "planted"
    NULL = "null"


@dataclass(frozen=True)
class LearnerConfig:
    """区分器内部使用的学习器

    Attributes:
        kind: "l1"（L1 回归加阈值）或 "l2"
        degree: 多项式次数
        n_train: 训练样本数
        feature_map: 特征标架；None 表示环境坐标，此时解析模式只适用于 n 不超过 ORACLE_MAX_SUBSPACE
        method: 线性规划后端
    """

    kind: str = "l1"
    degree: int = 4
    n_train: int = 20_000
    feature_map: Optional[OrthonormalFrame] = None
    method: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ("l1", "l2"):
            raise ParameterError(f"未知的学习器类型：{self.kind}")

    @property
    def subspace(self) -> Optional[np.ndarray]:
        return None if self.feature_map is None else self.feature_map.matrix


@dataclass(frozen=True)
class DistinguishResult:
    """一次区分实验

    polynomial_correlation 是拟合多项式与标签的经验相关 E[p(x)y]（留出样本），
    用于检验低次多项式与植入标签不相关。
    """

    verdict: Verdict
    answer: float
    truth: float
    tolerance: float
    threshold: float
    polynomial_correlation: float
    polynomial_std_error: float
    learner_degree: int
    n_samples: int
    seed: int

    def to_row(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "final_query_value": self.answer,
            "truth": self.truth,
            "tolerance": self.tolerance,
            "threshold": self.threshold,
            "polynomial_correlation": self.polynomial_correlation,
            "polynomial_se": self.polynomial_std_error,
            "learner_degree": self.learner_degree,
            "n_samples": self.n_samples,
            "seed": self.seed,
        }


def _fit(learner: LearnerConfig, samples) -> PolynomialHypothesis:
    if learner.kind == "l1":
        return l1_regression(samples, learner.degree, learner.feature_map, learner.method)
    return l2_regression(samples, learner.degree, learner.feature_map)


def _polynomial_correlation(h: PolynomialHypothesis, dist: LabeledDistribution,
                            n_samples: int, seed: int):
    x, y = dist.sample(n_samples, seed, stream=1)
    product = h.polynomial(x) * y
    return float(product.mean()), float(product.std(ddof=1) / np.sqrt(product.size))


class _ClippedRatio:
    """clip(p, −C, C)/C"""

    def __init__(self, h: PolynomialHypothesis, C: float):
        self.h = h
        self.C = C

    @property
    def degree(self) -> int:
        return self.h.degree

    def __call__(self, x) -> np.ndarray:
        return np.clip(self.h.polynomial(x), -self.C, self.C) / self.C


def distinguish_boolean(dist: LabeledDistribution, epsilon: float, learner: LearnerConfig,
                        seed: int, mode: OracleMode = OracleMode(),
                        adversary: Adversary = Adversary.TOWARD_NULL,
                        oracle: Optional[StatOracle] = None) -> DistinguishResult:
    """用学习器区分零分布与植入分布

    训练学习器并阈值化得到 h，再以容差 ε/2 查询 E[h(x)y]；
    答案严格大于 ε/2 时判为植入，等于 ε/2 时判为零分布。

    Args:
        dist: NullDistribution 或 PlantedBoolean
        epsilon: 误差参数 ε ∈ (0, 1]
        learner: 学习器配置
        seed: 训练与留出样本的种子
        mode: 最终查询的预言机模式
        adversary: 预言机应答策略
        oracle: 复用的预言机（累计截断次数）

    Returns:
        DistinguishResult
    """
    if not 0.0 < epsilon <= 1.0:
        raise ParameterError(f"ε 必须在 (0, 1] 内：{epsilon}")
    samples = dist.sample(learner.n_train, seed)
    fitted = _fit(learner, samples)
    h = threshold_hypothesis(fitted, samples)
    tau = epsilon / 2.0
    query = correlation_query(h, tau, mode, adversary, learner.subspace)
    answer = (oracle or StatOracle()).query(dist, query)
    verdict = Verdict.PLANTED if answer.value > tau else Verdict.NULL
    correlation, std_error = _polynomial_correlation(fitted, dist, learner.n_train, seed)
    logger.info("%s：最终查询 %.6f（真值 %.6f，阈值 %.6f）→ %s",
                dist.descriptor, answer.value, answer.truth, tau, verdict.value)
    return DistinguishResult(verdict, answer.value, answer.truth, tau, tau, correlation,
                             std_error, learner.degree, learner.n_train, seed)


def distinguish_real(dist: LabeledDistribution, C: float, learner: LearnerConfig, seed: int,
                     tolerance: Optional[float] = None, mode: OracleMode = OracleMode(),
                     adversary: Adversary = Adversary.TOWARD_NULL,
                     oracle: Optional[StatOracle] = None) -> DistinguishResult:
    """实值标签的区分器

    在 (x, C·y) 上做 L2 回归得到 p，取 h = clip(p, −C, C)/C，以容差 τ（缺省 1/(12C)）
    查询 E[h(x)y]；答案不小于 1/(6C) − τ/2 时判为植入。

    Raises:
        ParameterError: C ≤ 1
    """
    if C <= 1.0:
        raise ParameterError(f"标签缩放 C 必须大于 1：{C}（C ≤ 1 说明见证连接有误）")
    tau = 1.0 / (12.0 * C) if tolerance is None else tolerance
    scaled = RealScaledLabels(dist, C)
    samples = scaled.sample(learner.n_train, seed)
    fitted = l2_regression(samples, learner.degree, learner.feature_map)
    h = _ClippedRatio(fitted, C)
    query = correlation_query(h, tau, mode, adversary, learner.subspace)
    answer = (oracle or StatOracle()).query(dist, query)
    threshold = 1.0 / (6.0 * C) - tau / 2.0
    verdict = Verdict.PLANTED if answer.value >= threshold else Verdict.NULL
    correlation, std_error = _polynomial_correlation(fitted, scaled, learner.n_train, seed)
    logger.info("%s（C=%.4f）：最终查询 %.6f（真值 %.6f，阈值 %.6f）→ %s",
                dist.descriptor, C, answer.value, answer.truth, threshold, verdict.value)
    return DistinguishResult(verdict, answer.value, answer.truth, tau, threshold, correlation,
                             std_error, learner.degree, learner.n_train, seed)
