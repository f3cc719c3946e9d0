import json
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Tuple

from dotenv import dotenv_values

from config.settings import ENV_PREFIX, RESULTS_DIR
from errors import ConfigError

logger = logging.getLogger(__name__)

SEED_LIMIT = 2 ** 64
COMMON_KEYS = ("seed", "out", "jobs")


@dataclass(frozen=True)
class Param:
    """子命令参数的类型与默认值

    Attributes:
        kind: int、float、str、bool、int_list、float_list 之一
        default: 默认值；None 表示可选且缺省时由子命令自行推导
        choices: 允许的取值（字符串参数）
        minimum: 数值（或列表中每个元素）的下界
        help: 命令行帮助
    """

    kind: str
    default: Any
    help: str = ""
    choices: Optional[Tuple[Any, ...]] = None
    minimum: Optional[float] = None


SCHEMAS: Dict[str, Dict[str, Param]] = {
    "degree-scan": {
        "target": Param("str", "sign", "目标函数", ("sign", "relu", "sigmoid")),
        "norm": Param("str", "L1", "范数", ("L1", "L2")),
        "eps": Param("float_list", [0.4, 0.3, 0.2, 0.15, 0.1], "误差列表", minimum=0.0),
        "d_max": Param("int", 200, "最高扫描次数", minimum=1),
        "method": Param("str", "highs", "线性规划后端", ("highs", "simplex")),
        "lp_power": Param("float", 4.0, "附带报告的 L_q 误差阶数", minimum=1.0),
    },
    "duality": {
        "target": Param("str", "sign", "±1 值目标", ("sign",)),
        "d": Param("int_list", list(range(1, 11)), "消失矩阶数列表", minimum=1),
        "order": Param("int", 400, "网格阶数", minimum=2),
        "method": Param("str", "highs", "线性规划后端", ("highs", "simplex")),
    },
    "moment-match": {
        "d": Param("int_list", [8, 16], "匹配矩个数列表", minimum=1),
        "n_samples": Param("int", 1_000_000, "尝试次数", minimum=1000),
        "product_columns": Param("int", 6, "保留用于乘积矩检验的列数", minimum=0),
        "ptf_k": Param("int", 4, "分段 PTF 的 k", minimum=2),
        "ptf_d": Param("int", 64, "PTF 分离实验的 d；0 表示跳过", minimum=0),
        "ptf_samples": Param("int", 1_000_000, "PTF 分离实验的样本数", minimum=10_000),
    },
    "frames": {
        "m": Param("int", 4, "标架行数", minimum=1),
        "n": Param("int", 400, "环境维数", minimum=2),
        "n_frames": Param("int", 64, "标架个数", minimum=2),
        "seeds": Param("int", 30, "重复的种子个数", minimum=1),
        "doubling": Param("bool", True, "是否同时在 2n 上重复"),
    },
    "gns-scan": {
        "k": Param("int_list", [4, 16, 64, 256], "半空间个数列表", minimum=2),
        "eps": Param("float", 0.02, "噪声参数", minimum=0.0),
        "n_samples": Param("int", 1_000_000, "样本对个数", minimum=100),
        "rho": Param("float_list", [0.01, 0.05, 0.1, 0.2, 0.5], "半空间闭式检验的 ρ", minimum=0.0),
        "ptf_degree": Param("int", 3, "随机一维 PTF 的次数", minimum=1),
        "ptf_eps": Param("float_list", [0.01, 0.04], "随机 PTF 的噪声参数列表", minimum=0.0),
    },
    "circle-check": {
        "d": Param("int", 10, "逼近多项式次数", minimum=2),
        "dimension": Param("int", 2, "目标所在维数", minimum=1),
        "n_circles": Param("int", 50, "随机圆周个数", minimum=2),
        "n_random": Param("int", 50, "随机恒等式实例个数", minimum=1),
        "points": Param("int", 2048, "每个圆周上的网格点数", minimum=64),
    },
    "plant-and-distinguish": {
        "d": Param("int", 4, "见证消失矩阶数", minimum=1),
        "m": Param("int", 1, "隐藏子空间维数", choices=(1,)),
        "n": Param("int", 50, "环境维数", minimum=2),
        "trials": Param("int", 10, "试验次数", minimum=1),
        "learner_degree": Param("int", 4, "区分器学习器次数", minimum=0),
        "low_degree": Param("int", 3, "低次相关性检验的次数", minimum=0),
        "n_samples": Param("int", 20_000, "训练样本数", minimum=100),
        "epsilon": Param("float", None, "区分参数 ε；缺省取见证相关性的 1/4（实值变体中也是见证相关性的下限）", minimum=0.0),
        "variant": Param("str", "boolean", "标签类型", ("boolean", "real")),
        "real_target": Param("str", "relu", "实值变体植入见证的目标；标签缩放 C 取 1/E[f·g]", ("relu", "sigmoid")),
        "adversary": Param("str", "toward_null", "预言机应答策略", ("toward_null", "none")),
        "oracle": Param("str", "analytic", "预言机模式", ("analytic", "empirical")),
        "oracle_samples": Param("int", 1_000_000, "经验预言机的样本数", minimum=2),
    },
    "learner-bench": {
        "target": Param("str", "sign", "见证所对应的 ±1 值目标", ("sign",)),
        "d": Param("int", 4, "见证消失矩阶数", minimum=1),
        "n": Param("int", 20, "环境维数", minimum=2),
        "degrees": Param("int_list", [1, 2, 3, 4, 5, 6], "学习器次数列表", minimum=0),
        "learner": Param("str", "l1", "回归类型", ("l1", "l2")),
        "n_train": Param("int", 20_000, "训练样本数", minimum=100),
        "n_test": Param("int", 100_000, "测试样本数", minimum=100),
    },
    "csq-bench": {
        "target": Param("str", "sigmoid", "实值目标", ("sigmoid", "relu")),
        "d": Param("int", 2, "截去的低次部分", minimum=1),
        "eps": Param("float", 0.1, "误差参数", minimum=0.0),
        "m": Param("int", 1, "隐藏子空间维数", choices=(1,)),
        "n": Param("int", 100, "环境维数", minimum=2),
        "frames": Param("int", 32, "标架个数", minimum=2),
        "max_degree": Param("int", 40, "Hermite 展开次数", minimum=1),
    },
    "all-acceptance": {
        "scale": Param("float", 1.0, "样本量缩放因子", minimum=0.0),
        "checks": Param("int_list", list(range(1, 15)), "要运行的检查编号", minimum=1),
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    """解析完成的实验配置

    Attributes:
        subcommand: 子命令
        params: 按模式类型转换后的参数
        seed: 主种子
        out_dir: 输出目录
        jobs: 并行宽度
        sources: 每个键最终取值的来源（default/file/env/cli）
    """

    subcommand: str
    params: Dict[str, Any]
    seed: int
    out_dir: str
    jobs: int
    sources: Dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "seed": self.seed,
            "out_dir": self.out_dir,
            "jobs": self.jobs,
            "params": dict(self.params),
            "sources": dict(self.sources),
        }


def env_prefix(subcommand: str) -> str:
    """子命令的环境变量前缀，例如 L1LAB_DEGREE_SCAN_"""
    return f"{ENV_PREFIX}{subcommand.upper().replace('-', '_')}_"


def _parse_list(raw: str) -> List[str]:
    text = raw.strip()
    if text.startswith("["):
        try:
            values = json.loads(text)
        except json.JSONDecodeError:
            values = text.strip("[]").split(",")
        if not isinstance(values, list):
            values = [values]
        return [str(v).strip() for v in values if str(v).strip()]
    return [part.strip() for part in text.split(",") if part.strip()]


def _parse_bool(raw: str) -> bool:
    text = raw.strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ValueError(raw)


def _convert(param: Param, raw: Any) -> Any:
    """按参数类型转换，非字符串值只做类型校验"""
    if param.kind == "int":
        if isinstance(raw, bool):
            raise ValueError(raw)
        return int(raw) if not isinstance(raw, str) else int(raw.strip())
    if param.kind == "float":
        return float(raw)
    if param.kind == "bool":
        return raw if isinstance(raw, bool) else _parse_bool(str(raw))
    if param.kind == "str":
        return str(raw).strip()
    items = raw if isinstance(raw, (list, tuple)) else _parse_list(str(raw))
    cast = int if param.kind == "int_list" else float
    values = [cast(v) for v in items]
    if not values:
        raise ValueError(raw)
    return values


def _check_value(key: str, param: Param, value: Any) -> List[str]:
    problems = []
    if param.choices is not None and value not in param.choices:
        problems.append(f"{key} 的取值 {value!r} 不在 {list(param.choices)} 中")
    if param.minimum is not None:
        items = value if isinstance(value, list) else [value]
        for item in items:
            if isinstance(item, (int, float)) and not isinstance(item, bool) and item < param.minimum:
                problems.append(f"{key} 的取值 {item} 小于下界 {param.minimum}")
    return problems


def _env_layer(subcommand: str, environ: Mapping[str, str]) -> Dict[str, str]:
    prefix = env_prefix(subcommand)
    return {name[len(prefix):].lower(): value for name, value in environ.items()
            if name.startswith(prefix)}


def _file_layer(path: str, problems: List[str]) -> Dict[str, str]:
    if not os.path.exists(path):
        problems.append(f"配置文件不存在：{path}")
        return {}
    values = dotenv_values(path)
    return {key.strip().lower(): value for key, value in values.items()
            if value is not None}


def load_config(subcommand: str, config_file: Optional[str] = None,
                overrides: Optional[Mapping[str, Any]] = None,
                environ: Optional[Mapping[str, str]] = None) -> ExperimentConfig:
    """按 默认值 < 配置文件 < 环境变量 < 命令行 的顺序合并配置

    Args:
        subcommand: 子命令名
        config_file: 扁平 key=value 配置文件
        overrides: 命令行给出的键值（未给出的键不出现）
        environ: 环境变量，缺省取 os.environ

    Returns:
        ExperimentConfig

    Raises:
        ConfigError: 列出全部未知键、类型错误与越界值
    """
    if subcommand not in SCHEMAS:
        raise ConfigError([f"未知的子命令：{subcommand}"])
    schema = SCHEMAS[subcommand]
    environ = os.environ if environ is None else environ
    problems: List[str] = []

    layers = [("default", {k: p.default for k, p in schema.items()})]
    if config_file:
        layers.append(("file", _file_layer(config_file, problems)))
    layers.append(("env", _env_layer(subcommand, environ)))
    layers.append(("cli", {k: v for k, v in (overrides or {}).items() if v is not None}))

    merged: Dict[str, Any] = {}
    sources: Dict[str, str] = {}
    for source, values in layers:
        for key, raw in values.items():
            if key not in schema and key not in COMMON_KEYS:
                problems.append(f"未知的配置项 {key}（来源：{source}）")
                continue
            merged[key] = raw
            sources[key] = source

    params: Dict[str, Any] = {}
    for key, param in schema.items():
        raw = merged.get(key)
        if raw is None:
            params[key] = None
            continue
        try:
            value = _convert(param, raw)
        except (TypeError, ValueError):
            problems.append(f"{key} 的取值 {raw!r} 不是合法的 {param.kind}")
            continue
        problems.extend(_check_value(key, param, value))
        params[key] = value

    seed = None
    if merged.get("seed") is None:
        problems.append("缺少主种子：请用 --seed 或配置文件中的 seed= 给出")
    else:
        try:
            seed = int(str(merged["seed"]).strip())
            if not 0 <= seed < SEED_LIMIT:
                problems.append(f"主种子必须是 64 位无符号整数：{seed}")
        except ValueError:
            problems.append(f"主种子不是整数：{merged['seed']!r}")

    jobs = os.cpu_count() or 1
    if merged.get("jobs") is not None:
        try:
            jobs = int(str(merged["jobs"]).strip())
            if jobs < 1:
                problems.append(f"并行宽度必须为正：{jobs}")
        except ValueError:
            problems.append(f"并行宽度不是整数：{merged['jobs']!r}")
    else:
        sources["jobs"] = "default"

    out_dir = merged.get("out") or os.path.join(RESULTS_DIR, subcommand)
    sources.setdefault("out", "default")

    if problems:
        raise ConfigError(problems)
    config = ExperimentConfig(subcommand, params, seed, str(out_dir), jobs, sources)
    logger.info("配置 %s：种子 %d，输出 %s，并行 %d", subcommand, seed, out_dir, jobs)
    return config
