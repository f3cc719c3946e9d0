import logging
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy.interpolate import BarycentricInterpolator

from config.settings import (
    CIRCLE_GRID_POINTS,
    CIRCLE_K_FACTOR,
    CIRCLE_T_FACTOR,
    DERIVATIVE_GRID_POINTS,
    SE_MULTIPLIER,
)
from errors import DegenerateInputError, ParameterError
from hermite import HermiteExpansion
from quadrature import make_rng
from targets import TargetFunction

logger = logging.getLogger(__name__)

IDENTITY_TOLERANCE = 1e-8
OVERSAMPLING = 8


@dataclass(frozen=True)
class TrigPolynomial:
    """p(θ) = Σ_{|n|≤D} b_n e^{inθ}，coefficients[n + D] = b_n"""

    coefficients: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.coefficients, dtype=complex).reshape(-1)
        if b.size % 2 == 0:
            raise ParameterError(f"系数个数必须为奇数 2D+1：{b.size}")
        object.__setattr__(self, "coefficients", b)

    @classmethod
    def from_cosines(cls, amplitudes) -> "TrigPolynomial":
        """Σ_n aₙ cos(nθ)"""
        a = np.asarray(amplitudes, dtype=float)
        degree = a.size - 1
        b = np.zeros(2 * degree + 1, dtype=complex)
        b[degree] = a[0]
        b[degree + 1:] = a[1:] / 2.0
        b[:degree] = a[1:][::-1] / 2.0
        return cls(b)

    @classmethod
    def random_real(cls, degree: int, seed: int) -> "TrigPolynomial":
        """系数满足 b_{−n} = conj(b_n) 的随机实三角多项式"""
        rng = make_rng(seed, 9, degree)
        positive = (rng.standard_normal(degree) + 1j * rng.standard_normal(degree)) / np.sqrt(2.0)
        b = np.concatenate([np.conj(positive[::-1]), [rng.standard_normal()], positive])
        return cls(b)

    @property
    def degree(self) -> int:
        return (self.coefficients.size - 1) // 2

    def coefficient(self, n: int) -> complex:
        D = self.degree
        return complex(self.coefficients[n + D]) if abs(n) <= D else 0j

    @property
    def is_real(self) -> bool:
        return bool(np.allclose(self.coefficients, np.conj(self.coefficients[::-1]), atol=1e-14))

    def evaluate(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        n = np.arange(-self.degree, self.degree + 1)
        values = np.exp(1j * np.multiply.outer(theta, n)) @ self.coefficients
        return values.real if self.is_real else values

    def __call__(self, theta) -> np.ndarray:
        return self.evaluate(theta)

    def derivative(self, k: int) -> "TrigPolynomial":
        """k 阶导数，系数乘以 (in)^k"""
        n = np.arange(-self.degree, self.degree + 1)
        return TrigPolynomial(self.coefficients * (1j * n) ** k)

    def circle_l1_norm(self, points: int = DERIVATIVE_GRID_POINTS) -> float:
        """(1/2π)∫|p|，均匀网格上的矩形公式"""
        theta = 2.0 * np.pi * np.arange(points) / points
        return float(np.mean(np.abs(self.evaluate(theta))))


@dataclass(frozen=True)
class BooleanTrace:
    """B(φ) = f(cos φ·y + sin φ·z)"""

    f: TargetFunction
    y: np.ndarray
    z: np.ndarray

    def points(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float).reshape(-1)
        return np.cos(theta)[:, None] * self.y[None, :] + np.sin(theta)[:, None] * self.z[None, :]

    def __call__(self, theta) -> np.ndarray:
        return self.f(self.points(theta))


CircleFunction = Union[TrigPolynomial, BooleanTrace, Callable]


def circle_fourier(F: CircleFunction, max_n: int, points: Optional[int] = None) -> TrigPolynomial:
    """离散正交和 b_n = (1/M) Σ_j F(2πj/M) e^{−inθ_j}，|n| ≤ max_n

    三角多项式在 M > degree + max_n 时精确。

    Raises:
        ParameterError: 采样点少于 8·max_n
    """
    if max_n < 0:
        raise ParameterError(f"最高频率必须非负：{max_n}")
    if points is None:
        points = max(CIRCLE_GRID_POINTS, OVERSAMPLING * max_n)
        if isinstance(F, TrigPolynomial):
            points = max(points, 2 * (F.degree + max_n) + 1)
    if points < OVERSAMPLING * max_n or points < 2 * max_n + 1:
        raise ParameterError(f"采样点 {points} 不足：至少需要 {OVERSAMPLING * max_n} 个",
                             {"points": points, "max_n": max_n})
    theta = 2.0 * np.pi * np.arange(points) / points
    values = np.asarray(F(theta), dtype=complex).reshape(-1)
    spectrum = np.fft.fft(values) / points
    n = np.arange(-max_n, max_n + 1)
    return TrigPolynomial(spectrum[n % points])


def circle_constants(d: int):
    """k 取最接近 3·ln d 的奇数，t = 0.1·ln d / d

    Raises:
        ParameterError: d < 2（t 会退化为 0）
    """
    if d < 2:
        raise ParameterError(f"圆周对称化需要 d ≥ 2：{d}")
    log_d = np.log(d)
    target = CIRCLE_K_FACTOR * log_d
    k = max(1, 2 * int(np.floor((target - 1.0) / 2.0 + 0.5)) + 1)
    return k, float(CIRCLE_T_FACTOR * log_d / d)


def _check_nodes(t: float, k: int):
    if k < 1 or k % 2 == 0:
        raise ParameterError(f"插值次数 k 必须是正奇数：{k}")
    if t == 0:
        raise DegenerateInputError("t = 0 时插值节点重合", {"t": t})
    if t < 0:
        raise ParameterError(f"t 必须为正：{t}")


def chebyshev_nodes(t: float, phi: float, k: int) -> np.ndarray:
    """z_m = t·cos(πm/k) + φ，m = 0..k"""
    return t * np.cos(np.pi * np.arange(k + 1) / k) + phi


def leading_coefficient(nodes: np.ndarray, values: np.ndarray) -> float:
    """插值多项式的首项系数 = 最高阶差商 Σ_m vₘ / ∏_{j≠m}(zₘ − z_j)"""
    total = 0.0
    for m, (z, v) in enumerate(zip(nodes, values)):
        others = np.delete(nodes, m)
        total += v / np.prod(z - others)
    return float(total)


@dataclass(frozen=True)
class CircleInterpolant:
    """过 k+1 个 Chebyshev 型节点的 k 次插值多项式 q"""

    nodes: np.ndarray
    values: np.ndarray
    leading: float
    t: float
    phi: float
    k: int

    def __call__(self, z) -> np.ndarray:
        return BarycentricInterpolator(self.nodes, self.values)(np.asarray(z, dtype=float))


def chebyshev_circle_interpolate(p: Callable, t: float, phi: float, k: int) -> CircleInterpolant:
    """q(z_m) = p(z_m) 的唯一 k 次插值（重心形式）

    Raises:
        ParameterError: k 不是正奇数
        DegenerateInputError: t = 0
    """
    _check_nodes(t, k)
    nodes = chebyshev_nodes(t, phi, k)
    values = np.real(np.asarray(p(nodes), dtype=complex)).reshape(-1)
    return CircleInterpolant(nodes, values, leading_coefficient(nodes, values), t, phi, k)


def _leading_of(q, t: float, phi: float, k: int) -> float:
    leading = getattr(q, "leading", None)
    if leading is not None:
        return float(leading)
    coef = getattr(q, "coef", None)
    if coef is not None:
        coef = np.asarray(coef, dtype=float)
        return float(coef[k]) if coef.size > k else 0.0
    nodes = chebyshev_nodes(t, phi, k)
    return leading_coefficient(nodes, np.asarray(q(nodes), dtype=float))


def _trace_of(q, t: float, phi: float):
    def R(theta):
        return np.asarray(q(t * np.cos(theta) + phi), dtype=float)

    return R


@dataclass(frozen=True)
class BkIdentity:
    b_k: float
    predicted: float
    equal: bool


def bk_identity_check(q, t: float, phi: float, k: int) -> BkIdentity:
    """R(θ) = q(t cos θ + φ) 的第 k 个系数 b_k 与 (t/2)^k·c_k 比较

    q 为 k 次多项式：CircleInterpolant、numpy Polynomial 或可调用对象（首项系数由差商给出）。
    """
    _check_nodes(t, k)
    R = _trace_of(q, t, phi)
    points = max(OVERSAMPLING * k, 64)
    b_k = circle_fourier(R, k, points).coefficient(k).real
    predicted = (t / 2.0) ** k * _leading_of(q, t, phi, k)
    scale = float(np.max(np.abs(R(2.0 * np.pi * np.arange(points) / points))))
    equal = abs(b_k - predicted) <= IDENTITY_TOLERANCE * abs(predicted) + 1e-14 * max(scale, 1e-300)
    return BkIdentity(float(b_k), float(predicted), bool(equal))


@dataclass(frozen=True)
class FilteringCheck:
    alternating_sum: float
    b_k: float
    b_minus_k: float
    residual: float

    @property
    def holds(self) -> bool:
        return self.residual <= IDENTITY_TOLERANCE


def filtering_identity_check(q, t: float, phi: float, k: int) -> FilteringCheck:
    """|Σ_{m=−k+1}^{k} q(t cos(πm/k)+φ)(−1)^m − 2k(b_k + b_{−k})|

    对实偶的 R，b_{−k} = b_k，右端即 4k·b_k。
    """
    _check_nodes(t, k)
    m = np.arange(-k + 1, k + 1)
    values = np.asarray(q(t * np.cos(np.pi * m / k) + phi), dtype=float)
    alternating = float(np.sum(values * (-1.0) ** m))
    coefficients = circle_fourier(_trace_of(q, t, phi), k, max(OVERSAMPLING * k, 64))
    b_k = coefficients.coefficient(k).real
    b_minus = coefficients.coefficient(-k).real
    residual = abs(alternating - 2 * k * (b_k + b_minus))
    return FilteringCheck(alternating, float(b_k), float(b_minus), float(residual))


@dataclass(frozen=True)
class DerivativeCheck:
    max_derivative: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.max_derivative <= self.bound * (1.0 + 1e-12) + 1e-12


def derivative_bound_check(p: TrigPolynomial, k: int,
                           points: int = DERIVATIVE_GRID_POINTS) -> DerivativeCheck:
    """max_θ |p^{(k)}(θ)| 与 ‖p‖₁ · Σ_{|n|≤d} |n|^k 的比较"""
    if k < 0:
        raise ParameterError(f"导数阶数必须非负：{k}")
    theta = 2.0 * np.pi * np.arange(points) / points
    maximum = float(np.max(np.abs(p.derivative(k).evaluate(theta))))
    n = np.arange(-p.degree, p.degree + 1)
    powers = np.abs(n).astype(float) ** k
    bound = p.circle_l1_norm(points) * float(np.sum(powers))
    return DerivativeCheck(maximum, bound)


@dataclass(frozen=True)
class SymmetrizationCheck:
    """圆周上 E|p − B| 与 (π/k)·Pr[B(φ−t) ≠ B(φ+t)] 的比较"""

    d: int
    k: int
    t: float
    n_circles: int
    lhs: float
    lhs_std_error: float
    crossing: float
    crossing_std_error: float
    difference_std_error: float

    @property
    def rhs(self) -> float:
        return np.pi / self.k * self.crossing

    @property
    def holds(self) -> bool:
        return self.lhs >= self.rhs - SE_MULTIPLIER * self.difference_std_error

    def to_row(self) -> dict:
        return {"d": self.d, "k": self.k, "t": self.t, "phi_draws": self.n_circles,
                "lhs": self.lhs, "lhs_se": self.lhs_std_error, "crossing": self.crossing,
                "rhs": self.rhs, "holds": self.holds}


def _polynomial_values(p, x: np.ndarray) -> np.ndarray:
    if isinstance(p, HermiteExpansion):
        return p.evaluate(x[:, :p.m])
    return np.asarray(p(x), dtype=float).reshape(-1)


def circle_symmetrization_check(f: TargetFunction, p, d: int, n_circles: int, seed: int,
                                points: int = CIRCLE_GRID_POINTS) -> SymmetrizationCheck:
    """在随机圆周 x(φ) = cos φ·y + sin φ·z 上检验对称化不等式

    每个圆周上 |p − B| 与越界指示在均匀 φ 网格上平均，再对圆周取平均；
    判定用逐圆周差值的标准误。
    """
    if not f.is_boolean:
        raise ParameterError(f"对称化检验需要布尔目标：{f.name}")
    if isinstance(p, HermiteExpansion) and p.stored_degree > d:
        raise ParameterError(f"多项式次数 {p.stored_degree} 超过 d={d}")
    if n_circles < 2:
        raise ParameterError(f"至少需要 2 个圆周：{n_circles}")
    k, t = circle_constants(d)
    theta = 2.0 * np.pi * np.arange(points) / points
    gaps = np.empty(n_circles)
    crossings = np.empty(n_circles)
    for i in range(n_circles):
        rng = make_rng(seed, 6, i)
        trace = BooleanTrace(f, rng.standard_normal(f.dimension), rng.standard_normal(f.dimension))
        B = trace(theta)
        gaps[i] = np.mean(np.abs(_polynomial_values(p, trace.points(theta)) - B))
        crossings[i] = np.mean(trace(theta - t) != trace(theta + t))
    difference = gaps - np.pi / k * crossings
    root = np.sqrt(n_circles)
    result = SymmetrizationCheck(d, k, t, n_circles, float(gaps.mean()), float(gaps.std(ddof=1) / root),
                                 float(crossings.mean()), float(crossings.std(ddof=1) / root),
                                 float(difference.std(ddof=1) / root))
    logger.info("圆周对称化 d=%d k=%d t=%.4g：E|p−B|=%.6f，(π/k)·越界=%.6f", d, k, t,
                result.lhs, result.rhs)
    if not result.holds:
        logger.warning("圆周对称化不等式未通过：%.6f < %.6f", result.lhs, result.rhs)
    return result
