import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from config.settings import MC_CHUNK_SIZE
from errors import ParameterError, SamplingError

logger = logging.getLogger(__name__)

# 采样器签名：sampler(rng, n) -> (n,) 或 (n, m) 数组
Sampler = Callable[[np.random.Generator, int], np.ndarray]


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo 估计：均值、标准误、样本数与种子"""

    mean: float
    std_error: float
    n_samples: int
    seed: int

    def within(self, value: float, multiplier: float = 5.0) -> bool:
        """value 是否落在 mean ± multiplier·SE 内"""
        return abs(self.mean - value) <= multiplier * self.std_error


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """按 (主种子, 流编号...) 派生独立可复现的随机数发生器"""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [int(s) for s in stream]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def standard_normal_sampler(m: Optional[int] = None) -> Sampler:
    """标准正态采样器；m 为 None 时返回一维样本"""

    def sampler(rng: np.random.Generator, n: int) -> np.ndarray:
        if m is None:
            return rng.standard_normal(n)
        return rng.standard_normal((n, m))

    return sampler


def mc_expect(sampler: Sampler, f: Callable, n_samples: int, seed: int,
              chunk_size: Optional[int] = None) -> McEstimate:
    """用给定采样器估计 E[f(X)]

    按 chunk_size（缺省 MC_CHUNK_SIZE）分块采样，第 k 块使用随机流 (seed, 0, k)，
    各块的均值与平方偏差和合并后给出总体估计。

    Args:
        sampler: 带种子的采样器
        f: 向量化被估函数
        n_samples: 样本数，至少 100
        seed: 主种子
        chunk_size: 每块样本数

    Returns:
        McEstimate，相同 (seed, n_samples, chunk_size) 下逐位一致

    Raises:
        ParameterError: 样本数过少或分块大小非正
        SamplingError: 采样器失败
    """
    if n_samples < 100:
        raise ParameterError(f"Monte Carlo 样本数至少为 100：{n_samples}")
    chunk_size = MC_CHUNK_SIZE if chunk_size is None else int(chunk_size)
    if chunk_size < 1:
        raise ParameterError(f"分块大小必须为正：{chunk_size}")
    count, mean, m2 = 0, 0.0, 0.0
    for k, start in enumerate(range(0, n_samples, chunk_size)):
        size = min(chunk_size, n_samples - start)
        rng = make_rng(seed, 0, k)
        try:
            samples = sampler(rng, size)
        except Exception as e:
            raise SamplingError(f"采样器失败（seed={seed}, n={size}）：{str(e)}") from e
        values = np.asarray(f(samples), dtype=float).reshape(-1)
        if values.shape[0] != size:
            raise SamplingError(f"被估函数返回 {values.shape[0]} 个值，期望 {size} 个")
        chunk_mean = float(np.mean(values))
        chunk_m2 = float(np.sum((values - chunk_mean) ** 2))
        # 两组均值与平方偏差和的合并
        total = count + size
        delta = chunk_mean - mean
        mean += delta * size / total
        m2 += chunk_m2 + delta ** 2 * count * size / total
        count = total
    std_error = float(np.sqrt(m2 / (count - 1)) / np.sqrt(count))
    return McEstimate(mean=mean, std_error=std_error, n_samples=count, seed=seed)
