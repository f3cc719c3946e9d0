import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import linalg

from config.settings import MC_CHUNK_SIZE, ORACLE_MAX_SUBSPACE, ORACLE_QUADRATURE_ORDER
from errors import ParameterError, ResourceError
from quadrature import gauss_hermite_rule, tensor_points
from .distributions import LabeledDistribution, NullDistribution

logger = logging.getLogger(__name__)

# 子空间维数 → 张量网格阶数；低维时用更密的网格以分辨见证的折点
_ORDER_BY_DIMENSION = {1: 400, 2: 160, 3: 40, 4: ORACLE_QUADRATURE_ORDER}


class OracleKind(str, Enum):
    ANALYTIC = "analytic"
    EMPIRICAL = "empirical"


@dataclass(frozen=True)
class OracleMode:
    kind: OracleKind = OracleKind.ANALYTIC
    n_samples: Optional[int] = None
    seed: Optional[int] = None

    @classmethod
    def analytic(cls) -> "OracleMode":
        return cls(OracleKind.ANALYTIC)

    @classmethod
    def empirical(cls, n_samples: int, seed: int) -> "OracleMode":
        if n_samples < 2:
            raise ParameterError(f"经验模式样本数至少为 2：{n_samples}")
        return cls(OracleKind.EMPIRICAL, int(n_samples), int(seed))


class Adversary(str, Enum):
    NONE = "none"
    TOWARD_NULL = "toward_null"


@dataclass(frozen=True)
class SQQuery:
    """统计查询 q(x, y)，容差 τ ∈ (0, 1]

    Attributes:
        function: 接受 ((N, n) 点阵, (N,) 标签)，返回 (N,) 取值
        tolerance: 容差 τ
        mode: 解析或经验模式
        adversary: 应答策略
        subspace: 查询依赖的 x 方向（k×n 行向量）；None 表示可能依赖全部坐标，
            解析模式下仅当 n 不超过 ORACLE_MAX_SUBSPACE 时可用
        bounded: 取值是否应落在 [−1, 1]（越界时截断并计数）
    """

    function: Callable
    tolerance: float
    mode: OracleMode = OracleMode()
    adversary: Adversary = Adversary.TOWARD_NULL
    subspace: Optional[np.ndarray] = None
    bounded: bool = True

    def __post_init__(self):
        if not 0.0 < self.tolerance <= 1.0:
            raise ParameterError(f"查询容差必须在 (0, 1] 内：{self.tolerance}")
        if self.subspace is not None:
            rows = np.atleast_2d(np.asarray(self.subspace, dtype=float))
            object.__setattr__(self, "subspace", rows)


@dataclass(frozen=True)
class OracleAnswer:
    """应答值、真实期望、零假设下的期望与标准误（解析模式下为 0）"""

    value: float
    truth: float
    null_value: float
    tolerance: float
    std_error: float
    clamped: int

    @property
    def deviation(self) -> float:
        return abs(self.value - self.truth)


def _with_frame(query: SQQuery, dist: LabeledDistribution) -> SQQuery:
    """零假设下沿用分布标架声明的方向"""
    if dist.frame is None or query.subspace is None:
        return query
    rows = np.vstack([dist.frame.matrix, query.subspace])
    return replace(query, subspace=rows)


class StatOracle:
    """STAT 预言机模拟器，累计截断次数"""

    def __init__(self):
        self.clamp_count = 0

    def _values(self, query: SQQuery, x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, int]:
        values = np.asarray(query.function(x, y), dtype=float).reshape(-1)
        if values.size != y.size:
            raise ParameterError(f"查询返回 {values.size} 个值，期望 {y.size} 个")
        if not query.bounded:
            return values, 0
        outside = int(np.sum(np.abs(values) > 1.0))
        if outside:
            values = np.clip(values, -1.0, 1.0)
        return values, outside

    def _basis(self, dist: LabeledDistribution, query: SQQuery) -> np.ndarray:
        """积分所需的正交基：分布标架与查询声明方向张成的子空间"""
        if query.subspace is None:
            if dist.n > ORACLE_MAX_SUBSPACE:
                raise ResourceError(
                    f"查询未声明依赖方向，环境维数 {dist.n} 超过 {ORACLE_MAX_SUBSPACE}，请声明 subspace 或改用经验模式",
                    {"dimension": dist.n})
            return np.eye(dist.n)
        rows = [block for block in (dist.frame.matrix if dist.frame is not None else None,
                                    query.subspace) if block is not None]
        basis = linalg.orth(np.vstack(rows).T).T
        if basis.shape[0] > ORACLE_MAX_SUBSPACE:
            raise ResourceError(
                f"查询与分布合并后的子空间维数 {basis.shape[0]} 超过 {ORACLE_MAX_SUBSPACE}，请改用经验模式",
                {"dimension": basis.shape[0]})
        return basis

    def _analytic(self, dist: LabeledDistribution, query: SQQuery) -> Tuple[float, int]:
        basis = self._basis(dist, query)
        r = basis.shape[0]
        points, weights = tensor_points(gauss_hermite_rule(_ORDER_BY_DIMENSION[r]), r)
        total = 0.0
        clamped = 0
        for start in range(0, weights.size, MC_CHUNK_SIZE):
            x = points[start:start + MC_CHUNK_SIZE] @ basis
            w = weights[start:start + MC_CHUNK_SIZE]
            for labels, probs in dist.label_law(x):
                values, outside = self._values(query, x, labels)
                clamped += outside
                total += float(np.sum(w * probs * values))
        return total, clamped

    def _empirical(self, dist: LabeledDistribution, query: SQQuery) -> Tuple[float, float, int]:
        x, y = dist.sample(query.mode.n_samples, query.mode.seed, stream=7)
        values, clamped = self._values(query, x, y)
        return float(values.mean()), float(values.std(ddof=1) / np.sqrt(values.size)), clamped

    def expectation(self, dist: LabeledDistribution, query: SQQuery) -> Tuple[float, float, int]:
        """E[q] 的 (估计, 标准误, 截断次数)"""
        if query.mode.kind == OracleKind.ANALYTIC:
            value, clamped = self._analytic(dist, query)
            return value, 0.0, clamped
        return self._empirical(dist, query)

    def query(self, dist: LabeledDistribution, query: SQQuery) -> OracleAnswer:
        """回答一个统计查询

        解析模式下答案与真实期望之差不超过 τ；TowardNull 在 τ 球内向零假设的取值移动。
        """
        truth, std_error, clamped = self.expectation(dist, query)
        null_value = truth
        if query.adversary == Adversary.TOWARD_NULL:
            if isinstance(dist, NullDistribution):
                null_value = truth
            else:
                null_query = _with_frame(query, dist)
                null_value, _se, _clamped = self.expectation(NullDistribution(dist.n), null_query)
        tau = query.tolerance
        value = truth + float(np.clip(null_value - truth, -tau, tau))
        if clamped:
            self.clamp_count += clamped
            logger.warning("查询取值越出 [−1, 1]，已截断 %d 次（累计 %d 次）", clamped, self.clamp_count)
        return OracleAnswer(value, truth, null_value, tau, std_error, clamped)


def sq_oracle(dist: LabeledDistribution, query: SQQuery, oracle: Optional[StatOracle] = None) -> float:
    """STAT(τ) 预言机的应答值"""
    return (oracle or StatOracle()).query(dist, query).value


def correlation_query(h: Callable, tolerance: float, mode: OracleMode = OracleMode(),
                      adversary: Adversary = Adversary.TOWARD_NULL,
                      subspace: Optional[np.ndarray] = None) -> SQQuery:
    """相关性查询 q(x, y) = h(x)·y，h 先截断到 [−1, 1]"""

    def function(x, y):
        return np.clip(np.asarray(h(x), dtype=float).reshape(-1), -1.0, 1.0) * y

    return SQQuery(function, tolerance, mode, adversary, subspace, bounded=False)


def csq_oracle(dist: LabeledDistribution, h: Callable, tolerance: float,
               mode: OracleMode = OracleMode(), adversary: Adversary = Adversary.TOWARD_NULL,
               subspace: Optional[np.ndarray] = None, oracle: Optional[StatOracle] = None) -> float:
    """CSQ 预言机：E[h(x)·y] 的 τ 近似

    实值标签时乘积可能越出 [−1, 1]，只截断 h 本身。
    """
    query = correlation_query(h, tolerance, mode, adversary, subspace)
    return (oracle or StatOracle()).query(dist, query).value
