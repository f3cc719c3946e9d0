import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, TypeVar

from config.experiment import ExperimentConfig
from errors import AcceptanceFailure, LabError
from .storage import ResultStore

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


@dataclass
class RunResult:
    """子命令的产出：若干结果表与一份汇总"""

    tables: Dict[str, List[Dict[str, Any]]] = field(default_factory=dict)
    summary: Dict[str, Any] = field(default_factory=dict)
    passed: Optional[bool] = None


Study = Callable[[Dict[str, Any], int, int], RunResult]
STUDIES: Dict[str, Study] = {}


def study(name: str):
    """把函数注册为子命令"""

    def register(fn: Study) -> Study:
        STUDIES[name] = fn
        return fn

    return register


def parallel_map(fn: Callable[[T], R], items: Iterable[T], jobs: int = 1) -> List[R]:
    """按输入顺序返回结果；jobs > 1 时用线程池调度"""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(fn, items))


def _print_summary(subcommand: str, result: RunResult, store: ResultStore):
    print(f"\n=== {subcommand} 完成 ===")
    for key, value in result.summary.items():
        if isinstance(value, (dict, list)):
            continue
        print(f"{key}: {value}")
    print(f"结果已写入：{store.out_dir}")


def _fail(store: Optional[ResultStore], error: LabError) -> int:
    payload = error.to_dict()
    if store is not None:
        store.write_error(payload)
    print(f"错误：{payload['error']}：{payload['message']}", file=sys.stderr)
    return error.exit_code


def run(subcommand: str, config: ExperimentConfig) -> int:
    """执行子命令并写出结果表、summary.json 与 manifest.json

    Args:
        subcommand: 子命令名
        config: 解析完成的配置

    Returns:
        退出码：0 成功，3 数值失败，4 验收未通过
    """
    # 延迟导入，注册全部子命令
    from . import studies, acceptance  # noqa: F401

    store = ResultStore(config.out_dir)
    fn = STUDIES.get(subcommand)
    if fn is None:
        return _fail(store, LabError(f"子命令未注册：{subcommand}"))

    start = time.perf_counter()
    try:
        result = fn(config.params, config.seed, config.jobs)
    except LabError as e:
        logger.error("%s 失败：%s", subcommand, e)
        return _fail(store, e)
    except Exception as e:
        logger.exception("%s 出现未预期的错误", subcommand)
        return _fail(store, LabError(f"未预期的错误：{str(e)}", {"type": type(e).__name__}))

    for name, rows in result.tables.items():
        store.write_csv(name, rows)
    summary = dict(result.summary)
    summary["runtime"] = time.perf_counter() - start
    store.write_summary(summary)
    store.write_manifest(config.to_dict())
    _print_summary(subcommand, result, store)

    if result.passed is False:
        failed = summary.get("failed", [])
        return _fail(store, AcceptanceFailure(f"验收检查未通过：{failed}", {"failed": failed}))
    return 0
