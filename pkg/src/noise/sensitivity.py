import logging
from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import multivariate_normal

from config.settings import MC_CHUNK_SIZE, SE_MULTIPLIER
from errors import ParameterError
from hermite import HermiteExpansion
from quadrature import McEstimate, make_rng
from targets import TargetFunction, breakpoints, make_target
from approx import continuous_l1_error

logger = logging.getLogger(__name__)

# 每块最多生成的浮点数个数，按维数换算块内样本数
_CHUNK_FLOATS = 4_000_000


@dataclass(frozen=True)
class CorrelatedPairSampler:
    """(1−ρ)-相关高斯对：y = (1−ρ)x + √(1−(1−ρ)²)·z

    Attributes:
        rho: 噪声参数 ρ ∈ [0, 2)
        n: 维数
        seed: 种子
    """

    rho: float
    n: int
    seed: int

    def __post_init__(self):
        if not 0.0 <= self.rho < 2.0:
            raise ParameterError(f"噪声参数 ρ 必须在 [0, 2) 内：{self.rho}")
        if self.n < 1:
            raise ParameterError(f"维数必须为正：{self.n}")

    @property
    def correlation(self) -> float:
        return 1.0 - self.rho

    def chunk_size(self) -> int:
        return max(1024, min(MC_CHUNK_SIZE, _CHUNK_FLOATS // self.n))

    def chunks(self, n_samples: int) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
        """按块产生样本对，第 i 块使用 (seed, 5, i) 派生的随机流"""
        r = self.correlation
        s = np.sqrt(max(0.0, 1.0 - r * r))
        size = self.chunk_size()
        for index, start in enumerate(range(0, n_samples, size)):
            rows = min(size, n_samples - start)
            rng = make_rng(self.seed, 5, index)
            x = rng.standard_normal((rows, self.n))
            if s == 0.0:
                yield x, r * x
            else:
                yield x, r * x + s * rng.standard_normal((rows, self.n))

    def sample(self, n_samples: int) -> Tuple[np.ndarray, np.ndarray]:
        pairs = list(self.chunks(n_samples))
        return np.vstack([p[0] for p in pairs]), np.vstack([p[1] for p in pairs])

    def coordinate_correlation(self, n_samples: int) -> McEstimate:
        """第一个坐标上 E[x₁y₁] 的估计，应等于 1−ρ"""
        products = np.concatenate([x[:, 0] * y[:, 0] for x, y in self.chunks(n_samples)])
        return McEstimate(float(products.mean()), float(products.std(ddof=1) / np.sqrt(products.size)),
                          int(products.size), self.seed)


def halfspace_gns_closed_form(rho: float) -> float:
    """过原点半空间的噪声敏感度 arccos(1−ρ)/π"""
    return float(np.arccos(1.0 - rho) / np.pi)


def crossing_closed_form(theta: float, rho: float) -> float:
    """Pr[x < θ < y]，(x, y) 为 (1−ρ)-相关的标准正态对"""
    r = 1.0 - rho
    if abs(r) >= 1.0:
        return 0.0
    joint = multivariate_normal(mean=[0.0, 0.0], cov=[[1.0, r], [r, 1.0]]).cdf([theta, theta])
    return float(multivariate_normal(mean=[0.0], cov=[[1.0]]).cdf([theta]) - joint)


def _check_boolean(f) -> None:
    boolean = getattr(f, "is_boolean", None)
    if boolean is None:
        boolean = getattr(f, "boolean", False)
    if not boolean:
        raise ParameterError(f"噪声敏感度只对布尔函数定义：{getattr(f, 'name', f)}")


def _dimension(f) -> int:
    for name in ("dimension", "m"):
        value = getattr(f, name, None)
        if isinstance(value, (int, np.integer)):
            return int(value)
    raise ParameterError("无法确定函数的维数")


def _estimate(values: np.ndarray, seed: int) -> McEstimate:
    n = values.size
    se = float(values.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return McEstimate(float(values.mean()), se, int(n), seed)


def gns_estimate(f: TargetFunction, rho: float, n_samples: int, seed: int) -> McEstimate:
    """GNS_ρ(f) = Pr[f(x) ≠ f(y)] 的 Monte Carlo 估计

    Raises:
        ParameterError: f 不是布尔函数或 ρ 越界
    """
    _check_boolean(f)
    if not 0.0 <= rho <= 1.0:
        raise ParameterError(f"噪声参数 ρ 必须在 [0, 1] 内：{rho}")
    sampler = CorrelatedPairSampler(rho, _dimension(f), seed)
    disagree = np.concatenate([(f(x) != f(y)).astype(float) for x, y in sampler.chunks(n_samples)])
    estimate = _estimate(disagree, seed)
    logger.info("GNS_%.4g(%s) ≈ %.6f ± %.2e", rho, getattr(f, "name", "f"),
                estimate.mean, estimate.std_error)
    return estimate


@dataclass(frozen=True)
class GnsRow:
    target: str
    k: int
    epsilon: float
    n_samples: int
    gns: float
    se: float
    crossing: float
    crossing_se: float
    crossing_exact: float
    seed: int

    def to_row(self) -> dict:
        return {
            "target": self.target, "k": self.k, "epsilon": self.epsilon,
            "n_samples": self.n_samples, "gns": self.gns, "se": self.se,
            "crossing": self.crossing, "crossing_se": self.crossing_se,
            "crossing_exact": self.crossing_exact, "seed": self.seed,
        }


def gns_intersection_scan(ks: Sequence[int], epsilon: float, n_samples: int,
                          seed: int) -> List[GnsRow]:
    """k 个半空间交集的 GNS_ε，各 k 共用同一批样本对的前 k 个坐标

    同时报告单个半空间的越界概率 Pr[xᵢ < θ < yᵢ]（对 k 个坐标取平均）及其二维正态闭式值。

    Raises:
        ParameterError: k < 2 或 ε ∉ [0, 0.5)
    """
    ks = [int(k) for k in ks]
    if not ks or min(ks) < 2:
        raise ParameterError(f"每个 k 至少为 2：{ks}")
    if not 0.0 <= epsilon < 0.5:
        raise ParameterError(f"ε 必须在 [0, 0.5) 内：{epsilon}")
    targets = [make_target("halfspace_intersection", k=k) for k in ks]
    sampler = CorrelatedPairSampler(epsilon, max(ks), seed)
    disagree = [[] for _ in ks]
    crossing = [[] for _ in ks]
    for x, y in sampler.chunks(n_samples):
        for i, (k, f) in enumerate(zip(ks, targets)):
            xk, yk = x[:, :k], y[:, :k]
            disagree[i].append((f(xk) != f(yk)).astype(float))
            theta = f.params["theta"]
            crossing[i].append(((xk < theta) & (theta < yk)).mean(axis=1))

    rows = []
    for i, (k, f) in enumerate(zip(ks, targets)):
        gns = _estimate(np.concatenate(disagree[i]), seed)
        cross = _estimate(np.concatenate(crossing[i]), seed)
        exact = crossing_closed_form(f.params["theta"], epsilon)
        rows.append(GnsRow(f.name, k, float(epsilon), n_samples, gns.mean, gns.std_error,
                           cross.mean, cross.std_error, exact, seed))
        logger.info("k=%d：GNS=%.6f ± %.2e，越界概率 %.6f（闭式 %.6f）",
                    k, gns.mean, gns.std_error, cross.mean, exact)
    return rows


def polynomial_sign(p: HermiteExpansion, dimension: Optional[int] = None) -> TargetFunction:
    """sign∘p（sign(0) 取 +1），p 作用于前 p.m 个坐标"""
    inner = make_target("polynomial_threshold", p=p)
    dimension = dimension or p.m
    if dimension == p.m:
        return inner
    if dimension < p.m:
        raise ParameterError(f"维数 {dimension} 小于多项式维数 {p.m}")
    return make_target("custom", evaluator=lambda x: inner(x[:, :p.m]), dimension=dimension,
                       range_tag="boolean_pm1", label=f"sign_p(deg={p.stored_degree})")


@dataclass(frozen=True)
class StructuralCheck:
    """E|f − p| ≥ (GNS_ε(f) − GNS_ε(sign∘p))/4"""

    lhs: float
    lhs_std_error: float
    gns_f: float
    gns_sign_p: float
    rhs: float
    rhs_std_error: float
    epsilon: float

    @property
    def combined_std_error(self) -> float:
        return float(np.hypot(self.lhs_std_error, self.rhs_std_error))

    @property
    def holds(self) -> bool:
        return self.lhs >= self.rhs - SE_MULTIPLIER * self.combined_std_error

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "lhs_se": self.lhs_std_error, "gns_f": self.gns_f,
                "gns_sign_p": self.gns_sign_p, "rhs": self.rhs, "rhs_se": self.rhs_std_error,
                "epsilon": self.epsilon, "holds": self.holds}


def structural_inequality_check(f: TargetFunction, p: HermiteExpansion, epsilon: float,
                                n_samples: int, seed: int) -> StructuralCheck:
    """结构不等式的中间一步

    一维时左端用连续积分精确计算；两侧 GNS 使用同一批样本对，
    右端标准误由逐对差值估计。
    """
    _check_boolean(f)
    n = _dimension(f)
    sign_p = polynomial_sign(p, n)

    if n == 1 and p.m == 1:
        lhs, lhs_se = continuous_l1_error(f, p, breakpoints(f)), 0.0
    else:
        gaps = np.concatenate([np.abs(f(x) - p.evaluate(x[:, :p.m]))
                               for x, _y in CorrelatedPairSampler(1.0, n, seed).chunks(n_samples)])
        lhs, lhs_se = float(gaps.mean()), float(gaps.std(ddof=1) / np.sqrt(gaps.size))

    sampler = CorrelatedPairSampler(epsilon, n, seed)
    flips_f, flips_p = [], []
    for x, y in sampler.chunks(n_samples):
        flips_f.append((f(x) != f(y)).astype(float))
        flips_p.append((sign_p(x) != sign_p(y)).astype(float))
    flips_f, flips_p = np.concatenate(flips_f), np.concatenate(flips_p)
    difference = (flips_f - flips_p) / 4.0
    result = StructuralCheck(lhs, lhs_se, float(flips_f.mean()), float(flips_p.mean()),
                             float(difference.mean()), float(difference.std(ddof=1) / np.sqrt(difference.size)),
                             float(epsilon))
    logger.info("结构不等式 ε=%.4g：E|f−p|=%.6f，右端 %.6f ± %.2e", epsilon, lhs,
                result.rhs, result.rhs_std_error)
    if not result.holds:
        logger.warning("结构不等式未通过：lhs=%.6f < rhs=%.6f", lhs, result.rhs)
    return result


def ptf_gns_sanity(degree: int, epsilons: Sequence[float], n_polys: int, n_samples: int,
                   seed: int, constant: float = 2.0) -> List[dict]:
    """随机一维多项式阈值函数的 GNS_ε 与 constant·deg·√ε 的比较，只记录不断言"""
    rows = []
    for index in range(n_polys):
        coefficients = make_rng(seed, 8, index).standard_normal(degree + 1)
        p = HermiteExpansion.univariate(coefficients)
        f = polynomial_sign(p)
        for eps in epsilons:
            estimate = gns_estimate(f, eps, n_samples, seed + index)
            bound = constant * degree * np.sqrt(eps)
            if estimate.mean > bound:
                logger.warning("PTF #%d 在 ε=%.3g 处 GNS=%.4f 超过 %.4f", index, eps, estimate.mean, bound)
            rows.append({"poly": index, "degree": degree, "epsilon": eps, "gns": estimate.mean,
                         "se": estimate.std_error, "bound": bound, "within": bool(estimate.mean <= bound)})
    return rows
