import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy.special import factorial2
from scipy.stats import binom, kstest

from config.settings import SE_MULTIPLIER
from errors import ParameterError
from quadrature import make_rng
from targets import make_target, normal_cdf, on_intervals
from .construction import FamilySample, MomentMatchSpec, sample_families

logger = logging.getLogger(__name__)

MAX_MOMENT_DEGREE = 12
SAMPLES_PER_MOMENT = 500


def gaussian_moment(j: int) -> float:
    """E[x^j]：奇数阶为 0，偶数阶为 (j−1)!!"""
    if j % 2:
        return 0.0
    return float(factorial2(j - 1, exact=True)) if j > 0 else 1.0


def gap_mass(values: np.ndarray, a: float) -> Tuple[float, float]:
    """Pr[(X mod a) ∈ (a/2, a)] 的估计与标准误"""
    if a <= 0:
        raise ParameterError(f"模数 a 必须为正：{a}")
    values = np.asarray(values, dtype=float)
    residue = np.mod(values, a)
    hit = ((residue > a / 2.0) & (residue < a)).astype(float)
    n = hit.size
    mass = float(hit.mean())
    return mass, float(np.sqrt(mass * (1.0 - mass) / n)) if n > 1 else 0.0


def expected_gap_mass(spec: MomentMatchSpec) -> float:
    """接受样本落入间隙的概率 ½·Pr[Bin(t, c) ≤ d]

    情形二的接受样本从不落入间隙；情形一只要有一个均匀分量，ΣYᵢ mod 1 就是均匀的。
    全部分量来自 E 的概率 (1−c)^t 下这一点只近似成立。
    """
    return 0.5 * float(binom.cdf(spec.d, spec.t, spec.c))


def marginal_ks(values: np.ndarray) -> Tuple[float, float]:
    """单个坐标与 N(0, 1) 的 Kolmogorov–Smirnov 统计量与 p 值"""
    values = np.asarray(values, dtype=float).reshape(-1)
    if values.size < 2:
        raise ParameterError(f"KS 检验至少需要 2 个样本：{values.size}")
    result = kstest(values, normal_cdf)
    return float(result.statistic), float(result.pvalue)


@dataclass(frozen=True)
class MomentReport:
    """经验矩与高斯矩的比较"""

    d: int
    n_samples: int
    moments: List[float]
    std_errors: List[float]
    reference: List[float]
    gap_mass: float
    gap_std_error: float
    acceptance_rate: float
    expected_gap_mass: float = float("nan")
    ks_statistic: float = float("nan")
    ks_pvalue: float = float("nan")

    def deviations(self) -> List[float]:
        return [abs(m - r) for m, r in zip(self.moments, self.reference)]

    def all_within(self, multiplier: float = SE_MULTIPLIER) -> bool:
        return all(dev <= multiplier * se for dev, se in zip(self.deviations(), self.std_errors))

    def to_row(self) -> dict:
        row = {"d": self.d, "n_samples": self.n_samples, "acceptance_rate": self.acceptance_rate}
        for j, value in enumerate(self.moments, start=1):
            row[f"m_hat_{j}"] = value
        for j, value in enumerate(self.std_errors, start=1):
            row[f"se_{j}"] = value
        row["gap_mass"] = self.gap_mass
        row["expected_gap_mass"] = self.expected_gap_mass
        row["ks_statistic"] = self.ks_statistic
        row["ks_pvalue"] = self.ks_pvalue
        return row


def check_moments(samples: Union[FamilySample, np.ndarray], d: int,
                  a: Optional[float] = None) -> MomentReport:
    """比较前 d 阶经验矩与高斯矩

    Args:
        samples: FamilySample 或一维样本数组
        d: 比较的阶数，不超过 12
        a: 计算间隙质量用的模数；samples 为 FamilySample 时缺省取其 spec.a

    Raises:
        ParameterError: d 过大或样本过少
    """
    if not 1 <= d <= MAX_MOMENT_DEGREE:
        raise ParameterError(f"矩阶数必须在 1..{MAX_MOMENT_DEGREE} 之间：{d}")
    acceptance = expected = float("nan")
    ks = (float("nan"), float("nan"))
    if isinstance(samples, FamilySample):
        acceptance = samples.acceptance_rate
        a = samples.spec.a if a is None else a
        values = samples.scaled
        expected = expected_gap_mass(samples.spec)
        if samples.columns.ndim == 2 and samples.columns.shape[1] >= 1:
            ks = marginal_ks(samples.columns[:, 0])
    else:
        values = np.asarray(samples, dtype=float).reshape(-1)
    n = values.size
    if n < SAMPLES_PER_MOMENT * d:
        raise ParameterError(f"样本数 {n} 不足以估计 {d} 阶矩（至少 {SAMPLES_PER_MOMENT * d}）")

    moments, errors = [], []
    power = np.ones_like(values)
    for _ in range(d):
        power = power * values
        moments.append(float(power.mean()))
        errors.append(float(power.std(ddof=1) / np.sqrt(n)))
    mass, mass_se = gap_mass(values, a) if a is not None else (float("nan"), float("nan"))
    report = MomentReport(d, n, moments, errors, [gaussian_moment(j) for j in range(1, d + 1)],
                          mass, mass_se, acceptance, expected, *ks)
    if not report.all_within():
        logger.warning("d=%d 的经验矩偏离超过 %.0f 个标准误", d, SE_MULTIPLIER)
    return report


@dataclass(frozen=True)
class ProductMoment:
    indices: Tuple[int, ...]
    mean_product: float
    se_product: float
    mean_square_product: float
    se_square_product: float

    def within(self, multiplier: float = SE_MULTIPLIER) -> bool:
        return (abs(self.mean_product) <= multiplier * self.se_product
                and abs(self.mean_square_product - 1.0) <= multiplier * self.se_square_product)


def product_moments(columns: np.ndarray, max_order: int = 4, n_subsets: int = 10,
                    seed: int = 0) -> List[ProductMoment]:
    """随机下标子集 S 上的 E[∏ Xᵢ] 与 E[∏ Xᵢ²]，作为低阶独立性的替代检验"""
    columns = np.asarray(columns, dtype=float)
    width = columns.shape[1]
    if width < 2:
        raise ParameterError(f"至少需要保留 2 列：{width}")
    rng = make_rng(seed, 2)
    candidates = [s for r in range(2, min(max_order, width) + 1) for s in combinations(range(width), r)]
    chosen = rng.choice(len(candidates), size=min(n_subsets, len(candidates)), replace=False)
    n = columns.shape[0]
    result = []
    for index in sorted(chosen):
        subset = candidates[index]
        prod = np.prod(columns[:, subset], axis=1)
        square = prod * prod
        result.append(ProductMoment(
            tuple(subset),
            float(prod.mean()), float(prod.std(ddof=1) / np.sqrt(n)),
            float(square.mean()), float(square.std(ddof=1) / np.sqrt(n)),
        ))
    return result


@dataclass(frozen=True)
class DensityRatio:
    """分箱经验密度与高斯密度之比"""

    edges: np.ndarray
    ratios: np.ndarray
    std_errors: np.ndarray
    bound: float

    def holds(self, multiplier: float = SE_MULTIPLIER) -> bool:
        return bool(np.all(self.ratios <= self.bound + multiplier * self.std_errors))

    @property
    def max_ratio(self) -> float:
        return float(self.ratios.max())


def density_ratio_histogram(values: np.ndarray, bins: int = 200, low: float = -4.0,
                            high: float = 4.0, bound: float = 2.0) -> DensityRatio:
    """每个分箱的 Pr_D[箱] / Pr_N[箱] 及其标准误"""
    values = np.asarray(values, dtype=float)
    n = values.size
    edges = np.linspace(low, high, bins + 1)
    counts, _ = np.histogram(values, bins=edges)
    p = counts / n
    reference = np.diff(normal_cdf(edges))
    ratios = p / reference
    errors = np.sqrt(p * (1.0 - p) / n) / reference
    return DensityRatio(edges, ratios, errors, bound)


@dataclass(frozen=True)
class PtfSeparation:
    """E_N[f] − E_D[f] 及其作为 L1 逼近误差下界的证书"""

    k: int
    d: int
    a: float
    null_mean: float
    planted_mean: float
    gap: float
    std_error: float
    n_samples: int
    seed: int

    @property
    def certified_lower_bound(self) -> float:
        return self.gap - 3.0 * self.std_error

    def to_dict(self) -> dict:
        return {
            "k": self.k, "d": self.d, "a": self.a,
            "null_mean": self.null_mean, "planted_mean": self.planted_mean,
            "gap": self.gap, "std_error": self.std_error,
            "certified_lower_bound": self.certified_lower_bound,
            "n_samples": self.n_samples, "seed": self.seed,
        }


def ptf_separation(k: int, d: int, n_samples: int, seed: int,
                   spec: Optional[MomentMatchSpec] = None) -> PtfSeparation:
    """分段 PTF 在高斯与矩匹配分布下的期望差

    E_N[f] 由 Φ 的增量精确计算，E_D[f] 用 Monte Carlo 估计。
    """
    spec = spec or MomentMatchSpec.from_degree(d, seed)
    f = make_target("piecewise_ptf", k=k, a=spec.a)
    null_mean = float(sum(normal_cdf(hi) - normal_cdf(lo) for lo, hi in on_intervals(f)))
    samples = sample_families(spec, n_accepted=n_samples, seed=seed).scaled
    values = f(samples[:, None])
    planted_mean = float(values.mean())
    std_error = float(values.std(ddof=1) / np.sqrt(values.size))
    result = PtfSeparation(k, d, spec.a, null_mean, planted_mean, null_mean - planted_mean,
                           std_error, values.size, seed)
    logger.info("PTF 分离 k=%d d=%d：E_N=%.6f，E_D=%.6f，差 %.6f ± %.2e",
                k, d, null_mean, planted_mean, result.gap, std_error)
    return result
