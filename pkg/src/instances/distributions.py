import logging
from abc import ABC, abstractmethod
from typing import Callable, List, Optional, Tuple

import numpy as np

from errors import ParameterError
from frames import OrthonormalFrame
from hermite import HermiteExpansion
from quadrature import make_rng

logger = logging.getLogger(__name__)

# (标签取值, 对应概率)；确定性标签时概率恒为 1
LabelBranch = Tuple[np.ndarray, np.ndarray]


def _as_points(x, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[1] != n:
        raise ParameterError(f"点的维数 {x.shape[1]} 与分布维数 {n} 不一致")
    return x


class LabeledDistribution(ABC):
    """x ~ N(0, I_n) 上的带标签分布"""

    label_kind = "pm1"

    def __init__(self, n: int, frame: Optional[OrthonormalFrame] = None):
        if n < 1:
            raise ParameterError(f"环境维数必须为正：{n}")
        if frame is not None and frame.n != n:
            raise ParameterError(f"标架环境维数 {frame.n} 与分布维数 {n} 不一致")
        self.n = n
        self.frame = frame

    @property
    @abstractmethod
    def descriptor(self) -> str:
        """分布描述，写入结果文件"""

    @property
    def opt(self) -> Optional[float]:
        return None

    @abstractmethod
    def conditional_mean(self, x) -> np.ndarray:
        """E[y | x]"""

    def label_law(self, x) -> List[LabelBranch]:
        """给定 x 时标签的条件分布，缺省为 ±1 标签"""
        mean = self.conditional_mean(x)
        return [(np.ones_like(mean), 0.5 * (1.0 + mean)),
                (-np.ones_like(mean), 0.5 * (1.0 - mean))]

    def _labels(self, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        u = rng.random(x.shape[0])
        return np.where(u < 0.5 * (1.0 + self.conditional_mean(x)), 1.0, -1.0)

    def sample(self, n_samples: int, seed: int, stream: int = 0) -> Tuple[np.ndarray, np.ndarray]:
        """抽取 (x, y)；相同 (seed, stream) 下逐位一致，且 x 与分布种类无关"""
        if n_samples < 1:
            raise ParameterError(f"样本数必须为正：{n_samples}")
        rng = make_rng(seed, 4, stream)
        x = rng.standard_normal((n_samples, self.n))
        return x, self._labels(x, rng)


class NullDistribution(LabeledDistribution):
    """N_n × U{±1}"""

    def __init__(self, n: int):
        super().__init__(n)

    @property
    def descriptor(self) -> str:
        return f"null(n={self.n})"

    def conditional_mean(self, x) -> np.ndarray:
        return np.zeros(_as_points(x, self.n).shape[0])


def _link_dimension(link) -> Optional[int]:
    for name in ("dimension", "m"):
        value = getattr(link, name, None)
        if isinstance(value, (int, np.integer)):
            return int(value)
    return None


class PlantedBoolean(LabeledDistribution):
    """E[y | x] = g(Ux)，g 取值于 [−1, 1]

    Attributes:
        witness: 见证 g（DualWitness、HermiteExpansion 或 [−1,1] 值的可调用对象）
        frame: 隐藏标架 U
    """

    def __init__(self, witness: Callable, frame: OrthonormalFrame):
        super().__init__(frame.n, frame)
        self.witness = witness

    @property
    def m(self) -> int:
        return self.frame.m

    @property
    def descriptor(self) -> str:
        degree = getattr(self.witness, "degree", "?")
        return f"planted_boolean(d={degree},m={self.m},n={self.n})"

    @property
    def opt(self) -> Optional[float]:
        return getattr(self.witness, "opt", None)

    @property
    def witness_correlation(self) -> Optional[float]:
        return getattr(self.witness, "correlation", None)

    def link(self, z) -> np.ndarray:
        """g 在投影坐标 z = Ux 上的取值"""
        z = np.asarray(z, dtype=float)
        return np.clip(np.asarray(self.witness(z), dtype=float).reshape(-1), -1.0, 1.0)

    def conditional_mean(self, x) -> np.ndarray:
        return self.link(self.frame.project(_as_points(x, self.n)))


class PlantedReal(LabeledDistribution):
    """确定性实值标签 y = G(Ux)"""

    label_kind = "real"

    def __init__(self, G: HermiteExpansion, frame: OrthonormalFrame, scale: Optional[float] = None):
        G = getattr(G, "G", G)
        if G.m != frame.m:
            raise ParameterError(f"G 的维数 {G.m} 与标架维数 {frame.m} 不一致")
        super().__init__(frame.n, frame)
        self.G = G
        self.scale = scale

    @property
    def descriptor(self) -> str:
        return f"planted_real(m={self.frame.m},n={self.n},norm={self.G.l2_norm():.6g})"

    def conditional_mean(self, x) -> np.ndarray:
        return self.G.evaluate(self.frame.project(_as_points(x, self.n)))

    def label_law(self, x) -> List[LabelBranch]:
        values = self.conditional_mean(x)
        return [(values, np.ones_like(values))]

    def _labels(self, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return self.conditional_mean(x)


class RealScaledLabels(LabeledDistribution):
    """把底层 ±1 标签放大为 ±C"""

    label_kind = "real"

    def __init__(self, base: LabeledDistribution, C: float):
        if C <= 0:
            raise ParameterError(f"标签缩放 C 必须为正：{C}")
        super().__init__(base.n, base.frame)
        self.base = base
        self.C = float(C)

    @property
    def descriptor(self) -> str:
        return f"scaled({self.base.descriptor},C={self.C:.6g})"

    def conditional_mean(self, x) -> np.ndarray:
        return self.C * self.base.conditional_mean(x)

    def label_law(self, x) -> List[LabelBranch]:
        return [(self.C * labels, probs) for labels, probs in self.base.label_law(x)]

    def _labels(self, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return self.C * self.base._labels(x, rng)


def planted_distribution(witness: Callable, frame: OrthonormalFrame) -> PlantedBoolean:
    """植入分布：x ~ N_n，y = +1 的概率为 (1 + g(Ux))/2

    Raises:
        ParameterError: 见证维数与标架维数不一致
    """
    m = _link_dimension(witness)
    if m is not None and m != frame.m:
        raise ParameterError(f"见证维数 {m} 与标架维数 {frame.m} 不一致")
    dist = PlantedBoolean(witness, frame)
    logger.info("构造植入分布 %s，OPT=%s", dist.descriptor,
                "未知" if dist.opt is None else f"{dist.opt:.6f}")
    return dist
