import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from config.settings import SE_MULTIPLIER, TENSOR_MAX_DIMENSION, WITNESS_RESIDUAL_ORDER
from errors import ParameterError
from frames import OrthonormalFrame, cross_gram
from hermite import HermiteExpansion
from quadrature import McEstimate, gauss_hermite_rule, mc_expect, tensor_points
from .distributions import PlantedBoolean

logger = logging.getLogger(__name__)

LOW_DEGREE_MASS_TOLERANCE = 1e-10
COINCIDENCE_TOLERANCE = 1e-12


def joint_projection_factor(U: OrthonormalFrame, V: OrthonormalFrame) -> np.ndarray:
    """(Ux, Vx) 的联合协方差 [[I, M], [Mᵀ, I]] 的平方根因子 A（A Aᵀ = Σ），M = U Vᵀ

    协方差可能奇异（子空间相交），故用特征分解而非 Cholesky。
    """
    if U.n != V.n:
        raise ParameterError(f"标架的环境维数不一致：{U.n} 与 {V.n}")
    M = U.matrix @ V.matrix.T
    cov = np.block([[np.eye(U.m), M], [M.T, np.eye(V.m)]])
    eigenvalues, vectors = linalg.eigh(cov)
    return vectors * np.sqrt(np.clip(eigenvalues, 0.0, None))


def _pair_sampler(factor: np.ndarray):
    def sampler(rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.standard_normal((n, factor.shape[1])) @ factor.T

    return sampler


def chi_pairwise(dist_u: PlantedBoolean, dist_v: PlantedBoolean, n_samples: int = 10**6,
                 seed: int = 0) -> McEstimate:
    """χ(D_U, D_V) = E[g(Ux) g(Vx)]

    一维且两标架张成同一直线时在见证网格上精确求和（标准误为 0），否则对
    (Ux, Vx) 的 2m 维联合高斯做 Monte Carlo。
    """
    if dist_u.m != dist_v.m:
        raise ParameterError(f"两个植入分布的见证维数不一致：{dist_u.m} 与 {dist_v.m}")
    if dist_u.witness is not dist_v.witness:
        logger.warning("两个植入分布使用不同的见证对象，χ 仍按各自的 g 计算")
    m = dist_u.m
    if m == 1:
        inner = float((dist_u.frame.matrix @ dist_v.frame.matrix.T)[0, 0])
        if abs(abs(inner) - 1.0) <= COINCIDENCE_TOLERANCE:
            nodes = getattr(dist_u.witness, "nodes", None)
            if nodes is None:
                rule = gauss_hermite_rule(WITNESS_RESIDUAL_ORDER)
                nodes, weights = rule.nodes, rule.weights
            else:
                weights = dist_u.witness.weights
            sign = 1.0 if inner > 0 else -1.0
            value = float(np.sum(weights * dist_u.link(nodes[:, None])
                                 * dist_v.link(sign * nodes[:, None])))
            return McEstimate(value, 0.0, 0, seed)

    factor = joint_projection_factor(dist_u.frame, dist_v.frame)

    def product(z):
        return dist_u.link(z[:, :m]) * dist_v.link(z[:, m:])

    estimate = mc_expect(_pair_sampler(factor), product, n_samples, seed)
    logger.info("χ(D_U, D_V) ≈ %.6f ± %.2e（%d 个样本）", estimate.mean, estimate.std_error, n_samples)
    return estimate


def conditional_chi_square(dist: PlantedBoolean) -> float:
    """条件分布 A = Ux | y=1 相对 N_m 的 χ²，密度比为 (1+g)/(1+E[g])"""
    if dist.m != 1:
        raise ParameterError(f"只对一维见证计算条件 χ²：m={dist.m}")
    nodes = getattr(dist.witness, "nodes", None)
    if nodes is None:
        rule = gauss_hermite_rule(WITNESS_RESIDUAL_ORDER)
        nodes, weights = rule.nodes, rule.weights
    else:
        weights = dist.witness.weights
    g = dist.link(nodes[:, None])
    mean = float(np.sum(weights * g))
    ratio = (1.0 + g) / (1.0 + mean)
    return float(np.sum(weights * ratio ** 2) - 1.0)


@dataclass(frozen=True)
class CorrelationCheck:
    """lhs = E[g(Ux)g(Vx)]，rhs = ‖UVᵀ‖₂^d · Σ_{t≥d}‖g^[t]‖²，检验 |lhs| ≤ rhs"""

    lhs: float
    lhs_std_error: float
    rhs: float
    spectral: float
    method: str

    @property
    def holds(self) -> bool:
        slack = SE_MULTIPLIER * self.lhs_std_error + 1e-10 * max(1.0, abs(self.rhs))
        return abs(self.lhs) <= self.rhs + slack

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "se": self.lhs_std_error, "rhs": self.rhs,
                "spectral": self.spectral, "method": self.method, "holds": self.holds}


def correlation_bound_check(g: HermiteExpansion, U: OrthonormalFrame, V: OrthonormalFrame, d: int,
                            n_samples: int = 200_000, seed: int = 0) -> CorrelationCheck:
    """相关引理的数值检验

    2m ≤ 4 时用张量求积精确计算左端，否则用 Monte Carlo。

    Raises:
        ParameterError: g 在次数 < d 的部分有质量，或维数不一致
    """
    if g.m != U.m or g.m != V.m:
        raise ParameterError(f"g 的维数 {g.m} 与标架维数 {U.m}/{V.m} 不一致")
    low = [abs(c) for J, c in g.items() if J.total_degree < d]
    if low and max(low) > LOW_DEGREE_MASS_TOLERANCE:
        raise ParameterError(f"g 在次数 < {d} 的部分有系数 {max(low):.3e}",
                             {"max_low_coefficient": max(low)})
    _fro, spectral = cross_gram(U, V)
    rhs = spectral ** d * g.l2_norm() ** 2
    factor = joint_projection_factor(U, V)
    m = g.m

    if 2 * m <= TENSOR_MAX_DIMENSION:
        # g(z)g(z') 的次数不超过 2·deg g，阶数 deg g + 1 即可精确
        rule = gauss_hermite_rule(max(g.stored_degree + 2, 8))
        points, weights = tensor_points(rule, 2 * m)
        z = points @ factor.T
        lhs = float(np.sum(weights * g.evaluate(z[:, :m]) * g.evaluate(z[:, m:])))
        result = CorrelationCheck(lhs, 0.0, rhs, spectral, "quadrature")
    else:
        estimate = mc_expect(_pair_sampler(factor),
                             lambda z: g.evaluate(z[:, :m]) * g.evaluate(z[:, m:]),
                             n_samples, seed)
        result = CorrelationCheck(estimate.mean, estimate.std_error, rhs, spectral, "monte_carlo")
    if not result.holds:
        logger.warning("相关引理检验未通过：lhs=%.6e，rhs=%.6e", result.lhs, result.rhs)
    return result


@dataclass(frozen=True)
class SQDimensionEstimate:
    """(γ, β)-相关族的查询下界 s·γ/(β−γ)

    valid 为 False 时 bound 为 None，offending 给出第一个违反界的 (i, j, 值)。
    """

    s: int
    gamma: float
    beta: float
    bound: Optional[float]
    valid: bool
    offending: Optional[Tuple[int, int, float]] = None
    max_off_diagonal: float = 0.0
    max_diagonal: float = 0.0

    def to_dict(self) -> dict:
        return {
            "s": self.s, "gamma": self.gamma, "beta": self.beta,
            "bound": self.bound, "valid": self.valid,
            "offending": list(self.offending) if self.offending else None,
            "max_off_diagonal": self.max_off_diagonal, "max_diagonal": self.max_diagonal,
        }


def sq_dimension_bound(s: int, gamma: float, beta: float) -> float:
    """s·γ/(β−γ)"""
    if not 0.0 <= gamma < beta:
        raise ParameterError(f"需要 0 ≤ γ < β：γ={gamma}, β={beta}")
    return s * gamma / (beta - gamma)


def sq_dimension_estimate(matrix: np.ndarray, gamma: float, beta: float) -> SQDimensionEstimate:
    """检验成对相关矩阵的 (γ, β)-相关性并给出查询下界

    Raises:
        ParameterError: γ ≥ β 或矩阵不对称
    """
    C = np.asarray(matrix, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ParameterError(f"相关矩阵必须为方阵：形状 {C.shape}")
    if not 0.0 <= gamma < beta:
        raise ParameterError(f"需要 0 ≤ γ < β：γ={gamma}, β={beta}")
    scale = max(1.0, float(np.max(np.abs(C)))) if C.size else 1.0
    if not np.allclose(C, C.T, rtol=0.0, atol=1e-9 * scale):
        raise ParameterError("相关矩阵不对称")

    s = C.shape[0]
    diagonal = np.abs(np.diag(C))
    off = np.abs(C - np.diag(np.diag(C)))
    max_diagonal = float(diagonal.max()) if s else 0.0
    max_off = float(off.max()) if s > 1 else 0.0

    offending = None
    bad_diagonal = np.flatnonzero(diagonal > beta)
    if bad_diagonal.size:
        i = int(bad_diagonal[0])
        offending = (i, i, float(C[i, i]))
    else:
        rows, cols = np.nonzero(np.triu(off > gamma, k=1))
        if rows.size:
            i, j = int(rows[0]), int(cols[0])
            offending = (i, j, float(C[i, j]))

    if offending is not None:
        logger.warning("相关矩阵违反 (γ=%g, β=%g) 界：位置 (%d, %d) 取值 %.6e",
                       gamma, beta, offending[0], offending[1], offending[2])
        return SQDimensionEstimate(s, gamma, beta, None, False, offending, max_off, max_diagonal)
    bound = sq_dimension_bound(s, gamma, beta)
    logger.info("SQ 维数估计：s=%d，γ=%g，β=%g，查询下界 %.6g", s, gamma, beta, bound)
    return SQDimensionEstimate(s, gamma, beta, bound, True, None, max_off, max_diagonal)
