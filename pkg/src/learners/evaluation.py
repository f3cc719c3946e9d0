import logging
import time
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Callable, Optional, Tuple, Union

import numpy as np

from errors import ParameterError

logger = logging.getLogger(__name__)


class Metric(str, Enum):
    MISCLASSIFICATION = "misclassification"
    L2 = "L2"


@dataclass(frozen=True)
class ResultRecord:
    """一次学习器评估的结果行

    opt 只在分布携带见证时填写，取 ½(1 − 网格 E[fg])。
    """

    experiment_id: str
    distribution: str
    learner_degree: int
    n_samples: int
    seed: int
    metric: str
    error: float
    std_error: float
    opt: Optional[float]
    label_correlation: float
    runtime: float

    @property
    def excess(self) -> Optional[float]:
        return None if self.opt is None else self.error - self.opt

    def to_row(self) -> dict:
        return asdict(self)


def evaluate(h: Callable, data, metric: Union[Metric, str] = Metric.MISCLASSIFICATION,
             n_samples: Optional[int] = None, seed: int = 0, experiment_id: str = "",
             learner_degree: Optional[int] = None) -> ResultRecord:
    """在留出集或新样本上评估假设

    Args:
        h: 假设，接受 (N, n) 点阵
        data: (x, y) 留出集，或带 sample(n_samples, seed) 方法的分布
        metric: misclassification 或 L2
        n_samples: data 为分布时抽取的样本数
        seed: 抽样种子
        experiment_id: 实验编号
        learner_degree: 学习器次数，缺省从 h.degree 读取

    Returns:
        ResultRecord

    Raises:
        ParameterError: 度量与标签类型不匹配
    """
    metric = Metric(metric)
    start = time.perf_counter()
    opt = None
    descriptor = "holdout"
    if hasattr(data, "sample"):
        if not n_samples:
            raise ParameterError("对分布评估时必须给出样本数")
        x, y = data.sample(n_samples, seed)
        opt = getattr(data, "opt", None)
        descriptor = getattr(data, "descriptor", type(data).__name__)
    else:
        x, y = data
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    predictions = np.asarray(h(x), dtype=float).reshape(-1)

    if metric == Metric.MISCLASSIFICATION:
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise ParameterError("误分类率只适用于 ±1 标签")
        if not np.all(np.isin(predictions, (-1.0, 1.0))):
            raise ParameterError("误分类率需要布尔假设，请先做阈值化")
        losses = (predictions != y).astype(float)
        error = float(losses.mean())
    else:
        losses = (predictions - y) ** 2
        error = float(np.sqrt(losses.mean()))
    std_error = float(losses.std(ddof=1) / np.sqrt(y.size)) if y.size > 1 else 0.0
    if metric == Metric.L2 and error > 0:
        # delta 方法：sqrt(mean) 的标准误
        std_error = std_error / (2.0 * error)
    correlation = float(np.mean(predictions * y))

    degree = learner_degree if learner_degree is not None else getattr(h, "degree", -1)
    record = ResultRecord(experiment_id, descriptor, int(degree), int(y.size), int(seed),
                          metric.value, error, std_error, opt, correlation,
                          time.perf_counter() - start)
    logger.info("评估 %s：%s=%.6f ± %.2e，OPT=%s，E[hy]=%.6f", descriptor, metric.value,
                error, std_error, "未知" if opt is None else f"{opt:.6f}", correlation)
    return record
