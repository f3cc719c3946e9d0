import json
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from config.settings import (
    HERMITE_DROP_TOLERANCE,
    TENSOR_MAX_DIMENSION,
    EXPAND_MC_SAMPLES,
    DEFAULT_SEED,
)
from errors import ParameterError
from quadrature import QuadratureRule, tensor_points, evaluate_points, make_rng
from .multi_index import MultiIndex, multi_indices
from .polynomials import hermite_table

logger = logging.getLogger(__name__)

KeyLike = Union[MultiIndex, Sequence[int], int]


def _as_index(key: KeyLike, m: int) -> MultiIndex:
    if isinstance(key, MultiIndex):
        index = key
    elif isinstance(key, (int, np.integer)):
        index = MultiIndex((int(key),))
    else:
        index = MultiIndex(tuple(key))
    if index.dimension != m:
        raise ParameterError(f"多重指标 {index.entries} 的维数与展开维数 {m} 不一致")
    return index


@dataclass(frozen=True)
class HermiteExpansion:
    """稀疏 Hermite 展开 Σ ĉ(J)·H_J(x)

    Attributes:
        m: 变量维数
        max_degree: 允许的最高总次数
        coefficients: 多重指标到系数的映射（绝对值低于 1e-14 的项被丢弃）
    """

    m: int
    max_degree: int
    coefficients: Mapping[MultiIndex, float] = field(default_factory=dict)

    def __post_init__(self):
        cleaned: Dict[MultiIndex, float] = {}
        for key, value in dict(self.coefficients).items():
            index = _as_index(key, self.m)
            if index.total_degree > self.max_degree:
                raise ParameterError(
                    f"系数 {index.entries} 的总次数超过 max_degree={self.max_degree}")
            value = float(value)
            if abs(value) >= HERMITE_DROP_TOLERANCE:
                cleaned[index] = cleaned.get(index, 0.0) + value
        ordered = dict(sorted(cleaned.items(), key=lambda kv: kv[0].sort_key()))
        object.__setattr__(self, "coefficients", ordered)

    @classmethod
    def univariate(cls, coefficients: Iterable[float]) -> "HermiteExpansion":
        """由一维系数向量 (ĉ(0), ĉ(1), ...) 构造"""
        values = list(coefficients)
        return cls(1, max(len(values) - 1, 0), {(j,): c for j, c in enumerate(values)})

    @classmethod
    def zero(cls, m: int, max_degree: int = 0) -> "HermiteExpansion":
        return cls(m, max_degree, {})

    def coefficient(self, key: KeyLike) -> float:
        return self.coefficients.get(_as_index(key, self.m), 0.0)

    def items(self):
        return self.coefficients.items()

    @property
    def stored_degree(self) -> int:
        """实际存储项的最高总次数，空展开为 -1"""
        return max((J.total_degree for J in self.coefficients), default=-1)

    def as_array(self) -> np.ndarray:
        """一维展开的稠密系数向量"""
        if self.m != 1:
            raise ParameterError("只有一维展开可以转换为稠密系数向量")
        result = np.zeros(self.max_degree + 1)
        for J, c in self.coefficients.items():
            result[J.entries[0]] = c
        return result

    def _filtered(self, keep: Callable[[int], bool]) -> "HermiteExpansion":
        return HermiteExpansion(self.m, self.max_degree,
                                {J: c for J, c in self.coefficients.items() if keep(J.total_degree)})

    def degree_part(self, t: int) -> "HermiteExpansion":
        return self._filtered(lambda k: k == t)

    def truncate_below(self, d: int) -> "HermiteExpansion":
        return self._filtered(lambda k: k < d)

    def tail_from(self, d: int) -> "HermiteExpansion":
        return self._filtered(lambda k: k >= d)

    def truncate(self, d: int) -> "HermiteExpansion":
        """保留 |J| ≤ d 的项，并把 max_degree 降为 d"""
        return HermiteExpansion(self.m, min(d, self.max_degree),
                                {J: c for J, c in self.coefficients.items() if J.total_degree <= d})

    def scaled(self, factor: float) -> "HermiteExpansion":
        return HermiteExpansion(self.m, self.max_degree,
                                {J: factor * c for J, c in self.coefficients.items()})

    def __add__(self, other: "HermiteExpansion") -> "HermiteExpansion":
        if other.m != self.m:
            raise ParameterError(f"展开维数不一致：{self.m} 与 {other.m}")
        merged = dict(self.coefficients)
        for J, c in other.coefficients.items():
            merged[J] = merged.get(J, 0.0) + c
        return HermiteExpansion(self.m, max(self.max_degree, other.max_degree), merged)

    def __sub__(self, other: "HermiteExpansion") -> "HermiteExpansion":
        return self + other.scaled(-1.0)

    def l2_norm(self) -> float:
        """由 Parseval 恒等式给出 ‖·‖₂ = √(Σ ĉ(J)²)"""
        return float(np.sqrt(sum(c * c for c in self.coefficients.values())))

    def _as_points(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.m == 1 and x.ndim == 1:
            x = x[:, None]
        elif x.ndim == 1:
            x = x[None, :]
        elif x.ndim == 0:
            x = x.reshape(1, 1)
        if x.shape[-1] != self.m:
            raise ParameterError(f"点的维数 {x.shape[-1]} 与展开维数 {self.m} 不一致")
        return x

    def evaluate(self, x) -> np.ndarray:
        """在 (N, m) 点阵上求值；一维展开也接受 (N,) 数组"""
        points = self._as_points(x)
        result = np.zeros(points.shape[0])
        if not self.coefficients:
            return result
        top = self.stored_degree
        tables = [hermite_table(top, points[:, i]) for i in range(self.m)]
        for J, c in self.coefficients.items():
            term = np.full(points.shape[0], c)
            for i, j in enumerate(J.entries):
                if j:
                    term = term * tables[i][:, j]
            result += term
        return result

    def __call__(self, x) -> np.ndarray:
        return self.evaluate(x)

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "max_degree": self.max_degree,
            "coeffs": [{"J": list(J.entries), "c": c} for J, c in self.coefficients.items()],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "HermiteExpansion":
        return cls(int(data["m"]), int(data["max_degree"]),
                   {tuple(item["J"]): float(item["c"]) for item in data["coeffs"]})

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)

    @classmethod
    def from_json(cls, text: str) -> "HermiteExpansion":
        return cls.from_dict(json.loads(text))


def expand(f: Callable, m: int, max_degree: int, rule: Optional[QuadratureRule] = None,
           n_samples: Optional[int] = None, seed: Optional[int] = None) -> HermiteExpansion:
    """计算 f 的 Hermite 系数 f̂(J) = E[f·H_J]，|J| ≤ max_degree

    m ≤ 4 时使用张量积求积；更高维时使用共享样本的 Monte Carlo，
    系数带有 O(1/√n) 的统计误差。

    Args:
        f: 接受 (N, m) 点阵的函数
        m: 维数
        max_degree: 最高总次数
        rule: 一维求积规则，阶数至少为 max_degree + 5
        n_samples: Monte Carlo 路径的样本数
        seed: Monte Carlo 路径的种子

    Returns:
        HermiteExpansion

    Raises:
        ParameterError: 求积阶数过小
    """
    if max_degree < 0:
        raise ParameterError(f"max_degree 必须非负：{max_degree}")
    indices = multi_indices(m, max_degree)

    if m <= TENSOR_MAX_DIMENSION:
        if rule is None:
            raise ParameterError("张量积路径需要求积规则")
        if rule.order < max_degree + 5:
            raise ParameterError(
                f"求积阶数 {rule.order} 过小，至少需要 max_degree + 5 = {max_degree + 5}")
        points, weights = tensor_points(rule, m)
        values = evaluate_points(f, points)
        weighted = (weights * values).reshape((rule.order,) * m)
        table = hermite_table(max_degree, rule.nodes)
        for _ in range(m):
            weighted = np.tensordot(weighted, table, axes=([0], [0]))
        coefficients = {J: float(weighted[J.entries]) for J in indices}
        return HermiteExpansion(m, max_degree, coefficients)

    n_samples = n_samples or EXPAND_MC_SAMPLES
    seed = DEFAULT_SEED if seed is None else seed
    logger.warning("维数 %d 超过张量积上限，改用 Monte Carlo 展开（n=%d）", m, n_samples)
    points = make_rng(seed, 1).standard_normal((n_samples, m))
    values = evaluate_points(f, points)
    tables = [hermite_table(max_degree, points[:, i]) for i in range(m)]
    coefficients = {}
    for J in indices:
        basis = np.ones(n_samples)
        for i, j in enumerate(J.entries):
            if j:
                basis = basis * tables[i][:, j]
        coefficients[J] = float(np.mean(values * basis))
    return HermiteExpansion(m, max_degree, coefficients)


def degree_part(e: HermiteExpansion, t: int) -> HermiteExpansion:
    """只保留总次数为 t 的项 f^[t]"""
    return e.degree_part(t)


def truncate_below(e: HermiteExpansion, d: int) -> HermiteExpansion:
    """保留 |J| < d 的项"""
    return e.truncate_below(d)


def tail_from(e: HermiteExpansion, d: int) -> HermiteExpansion:
    """保留 |J| ≥ d 的项，即 f − Σ_{i<d} f^[i]"""
    return e.tail_from(d)


def eval_expansion(e: HermiteExpansion, x) -> Union[float, np.ndarray]:
    """求值；单点输入返回标量"""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 0 or (x.ndim == 1 and e.m > 1)
    values = e.evaluate(x)
    return float(values[0]) if single else values


def l2_norm(e: HermiteExpansion) -> float:
    return e.l2_norm()
