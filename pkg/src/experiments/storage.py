import csv
import json
import logging
import math
import os
import platform
from importlib import metadata
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from config import settings

logger = logging.getLogger(__name__)

# 每次运行中允许不同的列
RUNTIME_COLUMNS = ("runtime",)
PACKAGES = ("numpy", "scipy", "python-dotenv")


def format_cell(value: Any) -> str:
    """CSV 单元格：实数保留 12 位有效数字，布尔值小写，缺失值留空"""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.12g}"
    if isinstance(value, (list, tuple, np.ndarray)):
        return ";".join(format_cell(v) for v in value)
    return str(value)


def to_jsonable(value: Any) -> Any:
    """把 numpy 类型和非有限实数转换为可写入 JSON 的值"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if hasattr(value, "value") and isinstance(getattr(value, "value"), str):
        return value.value
    return value


def _columns(rows: Sequence[Dict[str, Any]]) -> List[str]:
    columns: List[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    return columns


def settings_snapshot() -> Dict[str, Any]:
    """settings 模块中所有大写常量"""
    return {name: to_jsonable(getattr(settings, name)) for name in sorted(dir(settings))
            if name.isupper()}


def package_versions() -> Dict[str, Optional[str]]:
    versions: Dict[str, Optional[str]] = {"python": platform.python_version()}
    for name in PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = None
    return versions


class ResultStore:
    """一次运行的输出目录：CSV 结果表、summary.json、manifest.json 与 error.json"""

    def __init__(self, out_dir: str):
        """初始化输出目录

        Args:
            out_dir: 输出目录，不存在时创建
        """
        self.out_dir = out_dir
        os.makedirs(out_dir, exist_ok=True)
        self.written: List[str] = []

    def _path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def write_csv(self, name: str, rows: Iterable[Dict[str, Any]],
                  columns: Optional[Sequence[str]] = None) -> str:
        """按 RFC 4180 写出结果表，表头必有

        Args:
            name: 表名（不含扩展名）
            rows: 行字典，缺失的列留空
            columns: 列顺序，缺省按各行键首次出现的顺序

        Returns:
            写出的文件路径
        """
        rows = list(rows)
        columns = list(columns) if columns else _columns(rows)
        path = self._path(f"{name}.csv")
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
            writer.writerow(columns)
            for row in rows:
                writer.writerow([format_cell(row.get(column)) for column in columns])
        self.written.append(path)
        logger.info("已写出 %s（%d 行）", path, len(rows))
        return path

    def write_json(self, name: str, data: Any) -> str:
        path = self._path(f"{name}.json")
        with open(path, "w", encoding="utf-8") as f:
            json.dump(to_jsonable(data), f, ensure_ascii=False, indent=2, sort_keys=True)
            f.write("\n")
        self.written.append(path)
        return path

    def write_summary(self, summary: Dict[str, Any]) -> str:
        return self.write_json("summary", summary)

    def write_manifest(self, config: Dict[str, Any]) -> str:
        """写出完整解析后的配置、settings 快照、依赖版本与本次写出的文件"""
        return self.write_json("manifest", {
            "config": config,
            "settings": settings_snapshot(),
            "versions": package_versions(),
            "runtime_columns": list(RUNTIME_COLUMNS),
            "files": [os.path.basename(p) for p in self.written],
        })

    def write_error(self, error: Dict[str, Any]) -> str:
        return self.write_json("error", error)
