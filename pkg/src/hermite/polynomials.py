from typing import Optional, Sequence, Union

import numpy as np

from errors import ParameterError

ArrayLike = Union[float, np.ndarray]


def hermite_table(max_degree: int, x: ArrayLike, scale: Optional[np.ndarray] = None) -> np.ndarray:
    """计算 H_0..H_max_degree 在 x 处的值

    使用归一化三项递推 H_{k+1} = (x H_k − √k H_{k−1}) / √(k+1)。
    递推是线性的，给定 scale 时所有值同乘 scale（用于 √wᵢ·H_j(xᵢ) 这类有界组合）。

    Args:
        max_degree: 最高次数
        x: 求值点
        scale: 可选的逐点缩放因子

    Returns:
        形状为 x.shape + (max_degree+1,) 的数组
    """
    x = np.asarray(x, dtype=float)
    table = np.empty(x.shape + (max_degree + 1,))
    h0 = np.ones_like(x) if scale is None else np.broadcast_to(np.asarray(scale, dtype=float), x.shape).copy()
    table[..., 0] = h0
    if max_degree >= 1:
        table[..., 1] = x * h0
    for k in range(1, max_degree):
        table[..., k + 1] = (x * table[..., k] - np.sqrt(k) * table[..., k - 1]) / np.sqrt(k + 1)
    return table


def hermite_eval(j: int, x: ArrayLike) -> ArrayLike:
    """归一化 Hermite 多项式 H_j(x)，满足 E[H_j²] = 1

    Args:
        j: 次数，非负
        x: 标量或数组

    Returns:
        与 x 同形状的取值
    """
    if j < 0:
        raise ParameterError(f"Hermite 次数必须非负：{j}")
    values = hermite_table(j, x)[..., j]
    if np.ndim(values) == 0:
        return float(values)
    return values


def multi_hermite_eval(J: Sequence[int], x: np.ndarray) -> ArrayLike:
    """多元 Hermite 多项式 H_J(x) = ∏ H_{J_i}(x_i)

    Args:
        J: 多重指标（MultiIndex 或整数序列）
        x: 形状 (m,) 的点或 (N, m) 的点阵

    Raises:
        ParameterError: 维数不一致
    """
    entries = tuple(getattr(J, "entries", J))
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != len(entries):
        raise ParameterError(f"多重指标维数 {len(entries)} 与点的维数 {x.shape[-1]} 不一致")
    result = np.ones(x.shape[:-1])
    for i, j in enumerate(entries):
        if j:
            result = result * hermite_table(j, x[..., i])[..., j]
    if result.ndim == 0:
        return float(result)
    return result
