import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from errors import DegenerateInputError, ParameterError
from quadrature import make_rng

logger = logging.getLogger(__name__)

RANK_TOLERANCE = 1e-8
MAX_RETRIES = 3
FAMILY_SOFT_RATIO = 20


@dataclass(frozen=True)
class OrthonormalFrame:
    """m×n 正交归一标架 P，满足 P Pᵀ = I_m"""

    matrix: np.ndarray

    @property
    def m(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.matrix.shape[1]

    def orthonormality_residual(self) -> float:
        """‖P Pᵀ − I_m‖_F"""
        return float(np.linalg.norm(self.matrix @ self.matrix.T - np.eye(self.m)))

    def project(self, x: np.ndarray) -> np.ndarray:
        """(N, n) 点阵映射到 (N, m) 坐标 P x"""
        return np.asarray(x, dtype=float) @ self.matrix.T


def make_frame(rows: Sequence[Sequence[float]]) -> OrthonormalFrame:
    """改进 Gram–Schmidt 正交化，附带一次再正交化

    Args:
        rows: m 个 R^n 向量

    Returns:
        OrthonormalFrame，张成空间不变

    Raises:
        DegenerateInputError: 数值秩不足，指出出问题的行
    """
    A = np.array(rows, dtype=float)
    if A.ndim != 2:
        raise ParameterError(f"行向量必须组成二维数组：形状 {A.shape}")
    m, n = A.shape
    if m > n:
        raise DegenerateInputError(f"{m} 个 R^{n} 向量不可能线性无关", {"m": m, "n": n})
    Q = np.zeros_like(A)
    for i in range(m):
        v = A[i].copy()
        original = np.linalg.norm(v)
        for _ in range(2):
            for j in range(i):
                v -= (Q[j] @ v) * Q[j]
        norm = np.linalg.norm(v)
        if original == 0.0 or norm <= RANK_TOLERANCE * original:
            raise DegenerateInputError(f"第 {i} 行与前面的行线性相关（剩余范数 {norm:.3e}）",
                                       {"row": i})
        Q[i] = v / norm
    Q.setflags(write=False)
    return OrthonormalFrame(Q)


def cross_gram(U: OrthonormalFrame, V: OrthonormalFrame) -> Tuple[float, float]:
    """U Vᵀ 的 (Frobenius 范数, 谱范数)"""
    if U.n != V.n:
        raise ParameterError(f"标架的环境维数不一致：{U.n} 与 {V.n}")
    M = U.matrix @ V.matrix.T
    return float(np.linalg.norm(M)), float(np.linalg.norm(M, 2))


@dataclass(frozen=True)
class FrameFamily:
    """标架族及两两之间的交叉 Gram 范数"""

    frames: List[OrthonormalFrame]
    cross_frobenius: np.ndarray
    cross_spectral: np.ndarray
    seed: Optional[int] = None

    @classmethod
    def from_frames(cls, frames: Sequence[OrthonormalFrame], seed: Optional[int] = None) -> "FrameFamily":
        frames = list(frames)
        size = len(frames)
        frobenius = np.zeros((size, size))
        spectral = np.zeros((size, size))
        if size:
            stacked = np.vstack([f.matrix for f in frames])
            gram = stacked @ stacked.T
            offsets = np.cumsum([0] + [f.m for f in frames])
            for i in range(size):
                for j in range(i, size):
                    block = gram[offsets[i]:offsets[i + 1], offsets[j]:offsets[j + 1]]
                    frobenius[i, j] = frobenius[j, i] = np.linalg.norm(block)
                    spectral[i, j] = spectral[j, i] = np.linalg.norm(block, 2)
        return cls(frames, frobenius, spectral, seed)

    def __len__(self) -> int:
        return len(self.frames)

    def _off_diagonal(self, matrix: np.ndarray) -> np.ndarray:
        upper = np.triu_indices(len(self.frames), k=1)
        return matrix[upper]

    @property
    def max_cross_frobenius(self) -> float:
        values = self._off_diagonal(self.cross_frobenius)
        return float(values.max()) if values.size else 0.0

    @property
    def mean_cross_frobenius(self) -> float:
        values = self._off_diagonal(self.cross_frobenius)
        return float(values.mean()) if values.size else 0.0

    @property
    def median_cross_frobenius(self) -> float:
        values = self._off_diagonal(self.cross_frobenius)
        return float(np.median(values)) if values.size else 0.0

    @property
    def max_orthonormality_residual(self) -> float:
        return max((f.orthonormality_residual() for f in self.frames), default=0.0)


def _random_frame(m: int, n: int, seed: int, index: int) -> OrthonormalFrame:
    last_error = None
    for attempt in range(MAX_RETRIES):
        rows = make_rng(seed, 3, index, attempt).standard_normal((m, n))
        rows /= np.linalg.norm(rows, axis=1, keepdims=True)
        try:
            return make_frame(rows)
        except DegenerateInputError as e:
            logger.warning("第 %d 个标架第 %d 次生成秩不足，重试", index, attempt + 1)
            last_error = e
    raise DegenerateInputError(f"第 {index} 个标架连续 {MAX_RETRIES} 次秩不足：{last_error}",
                               {"frame": index})


def frame_family(m: int, n: int, N: int, seed: int) -> FrameFamily:
    """由独立高斯行向量生成 N 个 m×n 标架

    Raises:
        ParameterError: n < 2m 或 N < 1
    """
    if m < 1 or N < 1:
        raise ParameterError(f"m 与 N 必须为正：m={m}, N={N}")
    if n < 2 * m:
        raise ParameterError(f"环境维数 n={n} 至少为 2m={2 * m}")
    if m * N > FAMILY_SOFT_RATIO * n:
        logger.warning("标架族规模 m·N=%d 超过 %d·n=%d，交叉范数可能偏大",
                       m * N, FAMILY_SOFT_RATIO, FAMILY_SOFT_RATIO * n)
    frames = [_random_frame(m, n, seed, i) for i in range(N)]
    family = FrameFamily.from_frames(frames, seed)
    logger.info("标架族 m=%d n=%d N=%d：最大交叉范数 %.4f，平均 %.4f",
                m, n, N, family.max_cross_frobenius, family.mean_cross_frobenius)
    return family
