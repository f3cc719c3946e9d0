from typing import Any, Dict, List, Optional


class LabError(Exception):
    """实验室所有错误的基类

    Attributes:
        exit_code: 命令行退出码
        details: 机器可读的附加信息
    """

    exit_code = 3

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        """转换为可写入 error.json 的字典"""
        return {
            "error": type(self).__name__,
            "message": str(self),
            "details": self.details,
        }


class ParameterError(LabError):
    """参数不满足前置条件"""


class EvaluationError(LabError):
    """函数求值得到非有限值"""


class ResourceError(LabError):
    """问题规模超出限制"""


class SolverError(LabError):
    """线性规划求解器失败，附带迭代日志"""

    def __init__(self, message: str, iteration_log: Optional[List[str]] = None,
                 details: Optional[Dict[str, Any]] = None):
        super().__init__(message, details)
        self.iteration_log = iteration_log or []
        self.details.setdefault("iteration_log", self.iteration_log[-20:])


class DegenerateInputError(LabError):
    """输入退化（秩亏、零尾部、重合节点等）"""


class AnalysisError(LabError):
    """拟合或统计分析无法进行"""


class SamplingError(LabError):
    """采样器失败"""


class ConfigError(LabError):
    """配置错误，problems 中列出全部问题"""

    exit_code = 2

    def __init__(self, problems: List[str]):
        super().__init__("配置校验失败：" + "；".join(problems),
                         {"problems": list(problems)})
        self.problems = list(problems)


class AcceptanceFailure(LabError):
    """验收检查未全部通过"""

    exit_code = 4
