import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, Mapping, Optional

import numpy as np
from scipy.special import expit

from errors import ParameterError
from hermite import HermiteExpansion
from .normal import normal_upper_quantile

logger = logging.getLogger(__name__)


class TargetKind(str, Enum):
    SIGN = "sign"
    RELU = "relu"
    SIGMOID = "sigmoid"
    PIECEWISE_PTF = "piecewise_ptf"
    HALFSPACE_INTERSECTION = "halfspace_intersection"
    POLYNOMIAL_THRESHOLD = "polynomial_threshold"
    CUSTOM = "custom"


class RangeTag(str, Enum):
    PM1 = "boolean_pm1"
    ZERO_ONE = "boolean_01"
    REAL = "real"


@dataclass(frozen=True)
class TargetFunction:
    """目标函数：种类、维数、值域标签与求值器

    求值器接受 (N, m) 点阵并返回 (N,) 数组。
    """

    kind: TargetKind
    dimension: int
    range_tag: RangeTag
    evaluator: Callable[[np.ndarray], np.ndarray] = field(compare=False, repr=False)
    params: Dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def is_boolean(self) -> bool:
        return self.range_tag in (RangeTag.PM1, RangeTag.ZERO_ONE)

    @property
    def name(self) -> str:
        """用于结果文件的目标标识"""
        shown = {k: v for k, v in self.params.items()
                 if isinstance(v, (int, float, str, bool)) and k != "dimension"}
        if not shown:
            return self.kind.value
        inner = ",".join(f"{k}={v}" for k, v in shown.items())
        return f"{self.kind.value}({inner})"

    def _as_points(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 0:
            x = x.reshape(1, 1)
        elif x.ndim == 1:
            x = x[:, None] if self.dimension == 1 else x[None, :]
        if x.ndim != 2 or x.shape[1] != self.dimension:
            raise ParameterError(f"点的维数 {x.shape[-1]} 与目标维数 {self.dimension} 不一致")
        return x

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.evaluator(self._as_points(x)), dtype=float)


def _sign(values: np.ndarray) -> np.ndarray:
    # sign(0) 取 +1
    return np.where(values >= 0, 1.0, -1.0)


def _first_coordinate_dimension(params: Dict[str, Any]) -> int:
    dimension = int(params.get("dimension", 1))
    if dimension < 1:
        raise ParameterError(f"维数必须为正：{dimension}")
    return dimension


def _make_piecewise_ptf(k: int, a: float):
    intervals = [(i * a + a / 2.0, (i + 1) * a) for i in range(k // 2)]

    def evaluator(x: np.ndarray) -> np.ndarray:
        z = x[:, 0]
        on = np.zeros(z.shape, dtype=bool)
        for lo, hi in intervals:
            on |= (z > lo) & (z < hi)
        return on.astype(float)

    return evaluator, intervals


def make_target(kind, **params) -> TargetFunction:
    """构造目标函数

    Args:
        kind: TargetKind 或其字符串值
        **params: 各种类的参数
            sign/relu/sigmoid: dimension（作用于第一个坐标，默认 1）
            piecewise_ptf: k（正偶数）、a（区间长度）
            halfspace_intersection: k（半空间个数，也是维数）
            polynomial_threshold: p（HermiteExpansion 或其字典形式）
            custom: evaluator、dimension、range_tag

    Returns:
        TargetFunction

    Raises:
        ParameterError: 参数不合法
    """
    try:
        kind = TargetKind(kind)
    except ValueError:
        raise ParameterError(f"未知的目标种类：{kind}")

    if kind in (TargetKind.SIGN, TargetKind.RELU, TargetKind.SIGMOID):
        dimension = _first_coordinate_dimension(params)
        if kind == TargetKind.SIGN:
            return TargetFunction(kind, dimension, RangeTag.PM1,
                                  lambda x: _sign(x[:, 0]), {"dimension": dimension})
        if kind == TargetKind.RELU:
            return TargetFunction(kind, dimension, RangeTag.REAL,
                                  lambda x: np.maximum(x[:, 0], 0.0), {"dimension": dimension})
        return TargetFunction(kind, dimension, RangeTag.REAL,
                              lambda x: expit(x[:, 0]), {"dimension": dimension})

    if kind == TargetKind.PIECEWISE_PTF:
        k = int(params.get("k", 0))
        a = float(params.get("a", 0.0))
        if k < 2 or k % 2:
            raise ParameterError(f"分段 PTF 的 k 必须是不小于 2 的偶数：{k}")
        if a <= 0:
            raise ParameterError(f"区间长度 a 必须为正：{a}")
        evaluator, _intervals = _make_piecewise_ptf(k, a)
        return TargetFunction(kind, 1, RangeTag.ZERO_ONE, evaluator, {"k": k, "a": a})

    if kind == TargetKind.HALFSPACE_INTERSECTION:
        k = int(params.get("k", 0))
        if k < 1:
            raise ParameterError(f"半空间个数必须为正：{k}")
        theta = normal_upper_quantile(1.0 / k) if k > 1 else -np.inf
        return TargetFunction(kind, k, RangeTag.PM1,
                              lambda x: np.where(np.all(x <= theta, axis=1), 1.0, -1.0),
                              {"k": k, "theta": float(theta)})

    if kind == TargetKind.POLYNOMIAL_THRESHOLD:
        p = params.get("p")
        if isinstance(p, Mapping):
            p = HermiteExpansion.from_dict(p)
        if not isinstance(p, HermiteExpansion):
            raise ParameterError("多项式阈值函数需要 HermiteExpansion 参数 p")
        return TargetFunction(kind, p.m, RangeTag.PM1, lambda x: _sign(p.evaluate(x)),
                              {"p": p, "degree": p.stored_degree})

    evaluator = params.get("evaluator")
    if not callable(evaluator):
        raise ParameterError("自定义目标需要可调用的 evaluator")
    dimension = int(params.get("dimension", 1))
    range_tag = RangeTag(params.get("range_tag", RangeTag.REAL))
    return TargetFunction(kind, dimension, range_tag, evaluator,
                          {"dimension": dimension, "label": params.get("label", "custom")})


def eval_target(f: TargetFunction, x) -> Any:
    """在单点或点阵上求值；单点输入返回标量"""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 0 or (x.ndim == 1 and f.dimension > 1)
    values = f(x)
    return float(values[0]) if single else values


def to_pm1(f: TargetFunction) -> TargetFunction:
    """把 {0,1} 值目标映射为 ±1 值目标 2f − 1"""
    if f.range_tag == RangeTag.PM1:
        return f
    if f.range_tag != RangeTag.ZERO_ONE:
        raise ParameterError(f"实值目标 {f.name} 无法映射为 ±1")
    base = f.evaluator
    params = dict(f.params)
    params["pm1"] = True
    return TargetFunction(f.kind, f.dimension, RangeTag.PM1,
                          lambda x: 2.0 * base(x) - 1.0, params)


def to_spec(f: TargetFunction) -> Dict[str, Any]:
    """序列化为实验配置中的 kind + 参数表"""
    if f.kind == TargetKind.CUSTOM:
        raise ParameterError("自定义目标无法序列化")
    spec: Dict[str, Any] = {"kind": f.kind.value}
    for key, value in f.params.items():
        if key == "theta":
            continue
        spec[key] = value.to_dict() if isinstance(value, HermiteExpansion) else value
    return spec


def target_from_spec(spec: Mapping[str, Any]) -> TargetFunction:
    """由 {"kind": ..., 参数...} 构造目标"""
    params = dict(spec)
    kind = params.pop("kind", None)
    if kind is None:
        raise ParameterError("目标描述缺少 kind")
    pm1 = bool(params.pop("pm1", False))
    params.pop("degree", None)
    target = make_target(kind, **params)
    return to_pm1(target) if pm1 else target


def on_intervals(f: TargetFunction):
    """分段 PTF 取值为 1 的开区间列表 (ia + a/2, (i+1)a)"""
    if f.kind != TargetKind.PIECEWISE_PTF:
        raise ParameterError(f"{f.name} 不是分段 PTF")
    return _make_piecewise_ptf(f.params["k"], f.params["a"])[1]


def breakpoints(f: TargetFunction):
    """一维目标的不光滑点，供连续 L1 误差分段积分使用"""
    if f.kind == TargetKind.PIECEWISE_PTF:
        return sorted({x for interval in on_intervals(f) for x in interval})
    if f.kind in (TargetKind.SIGN, TargetKind.RELU):
        return [0.0]
    return []
