import logging
from dataclasses import dataclass
from math import ceil
from typing import Callable, Optional, Tuple

import numpy as np

from config.settings import DEFAULT_SEED, MC_CHUNK_SIZE
from errors import ParameterError
from quadrature import make_rng
from targets import normal_pdf

logger = logging.getLogger(__name__)

# 均匀分量的质量 c = min_{x∈[0,1]} φ(x) = φ(1)
UNIFORM_MASS = float(normal_pdf(1.0))


def gaussian_uniform_split() -> Tuple[float, Callable]:
    """把标准正态分解为 c·U([0,1]) + (1−c)·E

    Returns:
        (c, E 的密度函数)
    """
    c = UNIFORM_MASS

    def density(x):
        x = np.asarray(x, dtype=float)
        strip = ((x >= 0.0) & (x <= 1.0)).astype(float)
        return (normal_pdf(x) - c * strip) / (1.0 - c)

    return c, density


@dataclass(frozen=True)
class MomentMatchSpec:
    """矩匹配分布的参数：t = ⌈d/c⌉ + 1，a = 1/√t"""

    d: int
    c: float
    t: int
    a: float
    seed: int

    @classmethod
    def from_degree(cls, d: int, seed: Optional[int] = None) -> "MomentMatchSpec":
        if d < 1:
            raise ParameterError(f"匹配矩个数 d 必须为正：{d}")
        c = UNIFORM_MASS
        t = int(ceil(d / c)) + 1
        return cls(d=d, c=c, t=t, a=1.0 / np.sqrt(t), seed=DEFAULT_SEED if seed is None else seed)

    def to_dict(self) -> dict:
        return {"d": self.d, "c": self.c, "t": self.t, "a": self.a, "seed": self.seed}


def _sample_e_component(rng: np.random.Generator, size: int) -> Tuple[np.ndarray, int]:
    """从 E 中拒绝采样：正态提议，[0,1] 上以 1 − c/φ(x) 接受

    Returns:
        (样本, 提议次数)
    """
    out = np.empty(size)
    filled = 0
    proposals = 0
    while filled < size:
        k = size - filled
        x = rng.standard_normal(k)
        u = rng.random(k)
        inside = (x >= 0.0) & (x <= 1.0)
        keep = ~inside | (u < 1.0 - UNIFORM_MASS / normal_pdf(x))
        accepted = x[keep]
        out[filled:filled + accepted.size] = accepted
        filled += accepted.size
        proposals += k
    return out, proposals


@dataclass
class AttemptBatch:
    """一批尝试的结果"""

    values: np.ndarray          # 被接受的 (n_accepted, t) 样本
    n_attempts: int
    case1_accepted: int
    e_proposals: int
    e_draws: int


def _attempt(rng: np.random.Generator, spec: MomentMatchSpec, size: int) -> AttemptBatch:
    t = spec.t
    uniform_tag = rng.random((size, t)) < spec.c
    values = np.empty((size, t))
    n_uniform = int(uniform_tag.sum())
    values[uniform_tag] = rng.random(n_uniform)
    e_values, proposals = _sample_e_component(rng, size * t - n_uniform)
    values[~uniform_tag] = e_values
    # 情形一：均匀分量不超过 d 个，以 1/2 概率拒绝
    # 情形二：接受当且仅当 (ΣYᵢ) mod 1 ∈ [0, 1/2]
    case1 = uniform_tag.sum(axis=1) <= spec.d
    coin = rng.random(size) < 0.5
    residue = np.mod(values.sum(axis=1), 1.0)
    accept = np.where(case1, coin, residue <= 0.5)
    return AttemptBatch(values[accept], size, int(np.sum(accept & case1)),
                        proposals, size * t - n_uniform)


@dataclass(frozen=True)
class FamilyDraw:
    """一次尝试：accepted 为 False 时 values 为 None"""

    values: Optional[np.ndarray]
    accepted: bool
    case: int


def sample_family(spec: MomentMatchSpec, batch_seed: int) -> FamilyDraw:
    """按两种情形执行一次拒绝采样，接受时返回 (X₁..X_t)"""
    rng = make_rng(spec.seed, batch_seed)
    t = spec.t
    uniform_tag = rng.random(t) < spec.c
    values = np.empty(t)
    values[uniform_tag] = rng.random(int(uniform_tag.sum()))
    values[~uniform_tag] = _sample_e_component(rng, int((~uniform_tag).sum()))[0]
    if uniform_tag.sum() <= spec.d:
        accepted = bool(rng.random() < 0.5)
        case = 1
    else:
        accepted = bool(np.mod(values.sum(), 1.0) <= 0.5)
        case = 2
    return FamilyDraw(values if accepted else None, accepted, case)


@dataclass(frozen=True)
class FamilySample:
    """多次尝试汇总：缩放和 X = Σ Xᵢ/√t 以及保留的前若干列"""

    spec: MomentMatchSpec
    scaled: np.ndarray
    columns: np.ndarray
    n_attempts: int
    case1_accepted: int
    e_acceptance_rate: float

    @property
    def n_accepted(self) -> int:
        return self.scaled.size

    @property
    def acceptance_rate(self) -> float:
        return self.n_accepted / self.n_attempts if self.n_attempts else 0.0

    @property
    def case1_fraction(self) -> float:
        return self.case1_accepted / self.n_accepted if self.n_accepted else 0.0


def _rows_per_chunk(spec: MomentMatchSpec) -> int:
    return max(64, MC_CHUNK_SIZE // spec.t)


def sample_families(spec: MomentMatchSpec, n_attempts: Optional[int] = None,
                    n_accepted: Optional[int] = None, keep_columns: int = 0,
                    seed: Optional[int] = None) -> FamilySample:
    """分块执行拒绝采样，每块使用 (seed, 块编号) 派生的随机流

    给定 n_attempts 时恰好尝试这么多次；给定 n_accepted 时尝试到接受数足够为止，
    超出的部分按块内顺序截断。

    Args:
        spec: 矩匹配参数
        n_attempts: 尝试次数
        n_accepted: 需要的接受样本数
        keep_columns: 保留前几列原始变量
        seed: 种子，缺省取 spec.seed

    Returns:
        FamilySample
    """
    if (n_attempts is None) == (n_accepted is None):
        raise ParameterError("n_attempts 与 n_accepted 必须恰好给出一个")
    if keep_columns > spec.t:
        raise ParameterError(f"保留列数 {keep_columns} 超过族大小 {spec.t}")
    seed = spec.seed if seed is None else seed
    rows = _rows_per_chunk(spec)
    scaled, columns = [], []
    attempts = accepted = case1 = proposals = draws = 0
    chunk = 0
    sqrt_t = np.sqrt(spec.t)
    while True:
        if n_attempts is not None:
            size = min(rows, n_attempts - attempts)
            if size <= 0:
                break
        else:
            if accepted >= n_accepted:
                break
            size = rows
        batch = _attempt(make_rng(seed, 1, chunk), spec, size)
        scaled.append(batch.values.sum(axis=1) / sqrt_t)
        if keep_columns:
            columns.append(batch.values[:, :keep_columns])
        attempts += batch.n_attempts
        accepted += batch.values.shape[0]
        case1 += batch.case1_accepted
        proposals += batch.e_proposals
        draws += batch.e_draws
        chunk += 1

    scaled = np.concatenate(scaled) if scaled else np.zeros(0)
    columns = np.vstack(columns) if columns else np.zeros((scaled.size, 0))
    if n_accepted is not None:
        scaled = scaled[:n_accepted]
        columns = columns[:n_accepted]
    logger.info("矩匹配采样 d=%d t=%d：尝试 %d 次，接受 %d 个（%.4f）",
                spec.d, spec.t, attempts, accepted, accepted / max(attempts, 1))
    return FamilySample(spec, scaled, columns, attempts, case1,
                        draws / proposals if proposals else 1.0)


def sample_scaled(spec: MomentMatchSpec, n_samples: int, seed: Optional[int] = None) -> np.ndarray:
    """X = Σ Xᵢ/√t 的 n_samples 个样本，给定种子时确定"""
    if n_samples < 10_000:
        raise ParameterError(f"缩放样本数至少为 10⁴：{n_samples}")
    return sample_families(spec, n_accepted=n_samples, seed=seed).scaled
