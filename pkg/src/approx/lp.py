import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from config.settings import (
    LP_METHOD,
    LP_TOLERANCE,
    LP_MAX_ITERATIONS,
    SIMPLEX_MAX_VARIABLES,
    SIMPLEX_MAX_CONSTRAINTS,
    HIGHS_MAX_VARIABLES,
    HIGHS_MAX_CONSTRAINTS,
    HIGHS_FEASIBILITY_TOLERANCE,
)
from errors import ParameterError, ResourceError, SolverError
from .simplex import DenseSimplex

logger = logging.getLogger(__name__)

Bound = Tuple[Optional[float], Optional[float]]


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LinearProgram:
    """线性规划 opt cᵀx, A x (≤|=|≥) b, l ≤ x ≤ u

    Attributes:
        objective: 目标向量 c
        matrix: 约束矩阵（稠密或 scipy 稀疏）
        senses: 每行的约束方向 "<=", "=", ">="
        rhs: 右端项 b
        bounds: 每个变量的 (下界, 上界)，None 表示无界；缺省为 x ≥ 0
        maximize: 是否求最大
        tolerance: 可行性与最优性容差
    """

    objective: np.ndarray
    matrix: object
    senses: Sequence[str]
    rhs: np.ndarray
    bounds: Optional[Sequence[Bound]] = None
    maximize: bool = False
    tolerance: float = LP_TOLERANCE

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float)
        b = np.asarray(self.rhs, dtype=float)
        A = self.matrix if sparse.issparse(self.matrix) else np.asarray(self.matrix, dtype=float).reshape(-1, c.size)
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "rhs", b)
        object.__setattr__(self, "matrix", A)
        object.__setattr__(self, "senses", tuple(self.senses))
        if A.shape != (b.size, c.size):
            raise ParameterError(f"约束矩阵形状 {A.shape} 与 ({b.size}, {c.size}) 不一致")
        if len(self.senses) != b.size:
            raise ParameterError(f"约束方向个数 {len(self.senses)} 与行数 {b.size} 不一致")
        unknown = set(self.senses) - {"<=", "=", ">="}
        if unknown:
            raise ParameterError(f"未知的约束方向：{sorted(unknown)}")
        data = A.data if sparse.issparse(A) else A
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(b)) and np.all(np.isfinite(data))):
            raise ParameterError("线性规划含有非有限数据")
        if self.bounds is not None and len(self.bounds) != c.size:
            raise ParameterError(f"变量界个数 {len(self.bounds)} 与变量数 {c.size} 不一致")

    @property
    def n_variables(self) -> int:
        return self.objective.size

    @property
    def n_constraints(self) -> int:
        return self.rhs.size

    def variable_bounds(self) -> List[Bound]:
        if self.bounds is None:
            return [(0.0, None)] * self.n_variables
        return [(None if lo is None or lo == -np.inf else float(lo),
                 None if hi is None or hi == np.inf else float(hi)) for lo, hi in self.bounds]


@dataclass(frozen=True)
class LpSolution:
    """线性规划的解

    duals 与约束行一一对应，是最优值对右端项的导数（按原问题的最大/最小方向）。
    """

    status: LpStatus
    optimum: float
    x: np.ndarray
    duals: np.ndarray
    iterations: int
    method: str
    log: List[str] = field(default_factory=list)

    @property
    def is_optimal(self) -> bool:
        return self.status == LpStatus.OPTIMAL


def _check_size(lp: LinearProgram, method: str):
    if method == "simplex":
        max_vars, max_rows = SIMPLEX_MAX_VARIABLES, SIMPLEX_MAX_CONSTRAINTS
    else:
        max_vars, max_rows = HIGHS_MAX_VARIABLES, HIGHS_MAX_CONSTRAINTS
    if lp.n_variables > max_vars or lp.n_constraints > max_rows:
        raise ResourceError(
            f"线性规划规模超限（{lp.n_variables} 个变量，{lp.n_constraints} 个约束；"
            f"{method} 上限为 {max_vars} / {max_rows}）",
            {"variables": lp.n_variables, "constraints": lp.n_constraints, "method": method})


def _rows(A, index: np.ndarray):
    if sparse.issparse(A):
        return sparse.csr_matrix(A)[index]
    return A[index]


def _solve_highs(lp: LinearProgram) -> LpSolution:
    senses = np.array(lp.senses)
    c = -lp.objective if lp.maximize else lp.objective
    le = np.flatnonzero(senses == "<=")
    ge = np.flatnonzero(senses == ">=")
    eq = np.flatnonzero(senses == "=")
    ub_index = np.concatenate([le, ge])
    A_ub = b_ub = A_eq = b_eq = None
    if ub_index.size:
        upper = _rows(lp.matrix, le)
        lower = _rows(lp.matrix, ge)
        A_ub = sparse.vstack([upper, -lower]) if sparse.issparse(lp.matrix) else np.vstack([upper, -lower])
        b_ub = np.concatenate([lp.rhs[le], -lp.rhs[ge]])
    if eq.size:
        A_eq = _rows(lp.matrix, eq)
        b_eq = lp.rhs[eq]

    result = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                     bounds=lp.variable_bounds(), method="highs-ds",
                     options={"primal_feasibility_tolerance": HIGHS_FEASIBILITY_TOLERANCE,
                              "dual_feasibility_tolerance": HIGHS_FEASIBILITY_TOLERANCE,
                              "maxiter": LP_MAX_ITERATIONS})
    log = [f"HiGHS 状态 {result.status}：{result.message}"]
    iterations = int(getattr(result, "nit", 0) or 0)
    if result.status == 2:
        return LpSolution(LpStatus.INFEASIBLE, np.nan, np.zeros(lp.n_variables),
                          np.zeros(lp.n_constraints), iterations, "highs", log)
    if result.status == 3:
        optimum = np.inf if lp.maximize else -np.inf
        return LpSolution(LpStatus.UNBOUNDED, optimum, np.zeros(lp.n_variables),
                          np.zeros(lp.n_constraints), iterations, "highs", log)
    if result.status != 0:
        raise SolverError(f"HiGHS 求解失败：{result.message}", log)

    duals = np.zeros(lp.n_constraints)
    sign = -1.0 if lp.maximize else 1.0
    if ub_index.size:
        marginals = np.asarray(result.ineqlin.marginals)
        duals[le] = sign * marginals[:le.size]
        duals[ge] = -sign * marginals[le.size:]
    if eq.size:
        duals[eq] = sign * np.asarray(result.eqlin.marginals)
    optimum = -result.fun if lp.maximize else result.fun
    return LpSolution(LpStatus.OPTIMAL, float(optimum), np.asarray(result.x), duals,
                      iterations, "highs", log)


def _solve_simplex(lp: LinearProgram) -> LpSolution:
    """转换为标准形后交给 DenseSimplex"""
    A = lp.matrix.toarray() if sparse.issparse(lp.matrix) else lp.matrix
    c = -lp.objective if lp.maximize else lp.objective
    n = lp.n_variables
    bounds = lp.variable_bounds()

    # 变量替换：x = shift + Σ sign·x'，x' ≥ 0
    columns = []        # (原变量下标, 系数)
    shift = np.zeros(n)
    upper_rows = []     # (标准形列, 上界)
    for j, (lo, hi) in enumerate(bounds):
        if lo is not None:
            shift[j] = lo
            columns.append((j, 1.0))
            if hi is not None:
                upper_rows.append((len(columns) - 1, hi - lo))
        elif hi is not None:
            shift[j] = hi
            columns.append((j, -1.0))
        else:
            columns.append((j, 1.0))
            columns.append((j, -1.0))

    n_std = len(columns)
    index = np.array([j for j, _ in columns])
    signs = np.array([s for _, s in columns])
    A_std = A[:, index] * signs
    c_std = c[index] * signs
    b_std = lp.rhs - A @ shift

    senses = list(lp.senses)
    n_slack = sum(1 for s in senses if s != "=") + len(upper_rows)
    rows = lp.n_constraints + len(upper_rows)
    M = np.zeros((rows, n_std + n_slack))
    rhs = np.zeros(rows)
    M[:lp.n_constraints, :n_std] = A_std
    rhs[:lp.n_constraints] = b_std
    slack = n_std
    for i, sense in enumerate(senses):
        if sense == "<=":
            M[i, slack] = 1.0
            slack += 1
        elif sense == ">=":
            M[i, slack] = -1.0
            slack += 1
    for k, (col, width) in enumerate(upper_rows):
        i = lp.n_constraints + k
        M[i, col] = 1.0
        M[i, slack] = 1.0
        rhs[i] = width
        slack += 1

    row_sign = np.where(rhs < 0, -1.0, 1.0)
    M *= row_sign[:, None]
    rhs *= row_sign
    cost = np.concatenate([c_std, np.zeros(n_slack)])

    solver = DenseSimplex(M, rhs, cost, lp.tolerance, LP_MAX_ITERATIONS)
    result = solver.solve()
    if result.status == "infeasible":
        return LpSolution(LpStatus.INFEASIBLE, np.nan, np.zeros(n), np.zeros(lp.n_constraints),
                          result.iterations, "simplex", result.log)
    if result.status == "unbounded":
        optimum = np.inf if lp.maximize else -np.inf
        return LpSolution(LpStatus.UNBOUNDED, optimum, np.zeros(n), np.zeros(lp.n_constraints),
                          result.iterations, "simplex", result.log)

    x = shift.copy()
    np.add.at(x, index, signs * result.x[:n_std])
    sign = -1.0 if lp.maximize else 1.0
    duals = sign * row_sign[:lp.n_constraints] * result.duals[:lp.n_constraints]
    optimum = float(lp.objective @ x)
    return LpSolution(LpStatus.OPTIMAL, optimum, x, duals, result.iterations, "simplex", result.log)


def solve_lp(lp: LinearProgram, method: Optional[str] = None) -> LpSolution:
    """求解线性规划

    Args:
        lp: 线性规划
        method: "highs"（scipy 的 HiGHS 对偶单纯形）或 "simplex"（内置稠密单纯形），
            缺省取 LP_METHOD

    Returns:
        LpSolution，status 为 optimal、infeasible 或 unbounded

    Raises:
        ResourceError: 规模超限
        SolverError: 数值停滞或迭代超限，附带迭代日志
    """
    method = (method or LP_METHOD).lower()
    if method not in ("highs", "simplex"):
        raise ParameterError(f"未知的线性规划方法：{method}")
    _check_size(lp, method)
    solution = _solve_highs(lp) if method == "highs" else _solve_simplex(lp)
    logger.debug("线性规划（%s）：%s，最优值 %.12g，迭代 %d 次",
                 method, solution.status.value, solution.optimum, solution.iterations)
    return solution
