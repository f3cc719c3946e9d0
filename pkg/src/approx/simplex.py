import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np
from scipy.linalg import lstsq

from errors import SolverError

logger = logging.getLogger(__name__)


@dataclass
class SimplexResult:
    """标准形 min cᵀx, Ax = b, x ≥ 0 的求解结果"""

    status: str
    x: np.ndarray
    duals: np.ndarray
    objective: float
    iterations: int
    kept_rows: np.ndarray
    log: List[str] = field(default_factory=list)


class DenseSimplex:
    """稠密两阶段表格单纯形法，使用 Bland 规则防止循环

    输入为标准形 min cᵀx, Ax = b, x ≥ 0，要求 b ≥ 0。
    """

    def __init__(self, A: np.ndarray, b: np.ndarray, c: np.ndarray,
                 tolerance: float = 1e-9, max_iterations: int = 50_000):
        self.A = np.asarray(A, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.c = np.asarray(c, dtype=float)
        self.tolerance = tolerance
        self.max_iterations = max_iterations
        self.iterations = 0
        self.log: List[str] = []

    def _pivot(self, T: np.ndarray, row: int, col: int):
        T[row] /= T[row, col]
        pivot_row = T[row].copy()
        T -= np.outer(T[:, col], pivot_row)
        T[row] = pivot_row

    def _iterate(self, T: np.ndarray, basis: np.ndarray, n_allowed: int, phase: int) -> str:
        tol = self.tolerance
        while True:
            if self.iterations >= self.max_iterations:
                self.log.append(f"阶段 {phase}：达到迭代上限 {self.max_iterations}")
                raise SolverError(f"单纯形法在 {self.max_iterations} 次迭代内未收敛", self.log)
            reduced = T[-1, :n_allowed]
            candidates = np.flatnonzero(reduced < -tol)
            if candidates.size == 0:
                return "optimal"
            # Bland：进基取下标最小的负检验数列
            col = int(candidates[0])
            column = T[:-1, col]
            positive = np.flatnonzero(column > tol)
            if positive.size == 0:
                self.log.append(f"阶段 {phase}：第 {col} 列无界")
                return "unbounded"
            ratios = T[positive, -1] / column[positive]
            best = ratios.min()
            ties = positive[ratios <= best + tol * max(1.0, abs(best))]
            # Bland：出基取基变量下标最小的行
            row = int(ties[np.argmin(basis[ties])])
            self._pivot(T, row, col)
            basis[row] = col
            self.iterations += 1
            if self.iterations % 500 == 0:
                self.log.append(f"阶段 {phase}：第 {self.iterations} 次迭代，目标 {-T[-1, -1]:.12g}")

    def solve(self) -> SimplexResult:
        """两阶段求解

        Returns:
            SimplexResult，status 为 optimal、infeasible 或 unbounded

        Raises:
            SolverError: 迭代次数超限
        """
        tol = self.tolerance
        rows, n = self.A.shape

        # 第一阶段：为每一行添加人工变量
        T = np.zeros((rows + 1, n + rows + 1))
        T[:rows, :n] = self.A
        T[:rows, n:n + rows] = np.eye(rows)
        T[:rows, -1] = self.b
        T[-1, :n] = -self.A.sum(axis=0)
        T[-1, -1] = -self.b.sum()
        basis = np.arange(n, n + rows)

        self._iterate(T, basis, n + rows, phase=1)
        infeasibility = -T[-1, -1]
        if infeasibility > tol * max(1.0, float(np.abs(self.b).sum())):
            self.log.append(f"阶段 1 结束：人工变量之和 {infeasibility:.3e}")
            return SimplexResult("infeasible", np.zeros(n), np.zeros(rows), np.nan,
                                 self.iterations, np.arange(rows), self.log)

        # 把留在基中的人工变量换出；换不出的行是冗余约束
        keep = np.ones(rows, dtype=bool)
        for r in range(rows):
            if basis[r] < n:
                continue
            candidates = np.flatnonzero(np.abs(T[r, :n]) > tol)
            if candidates.size:
                col = int(candidates[0])
                self._pivot(T, r, col)
                basis[r] = col
            else:
                keep[r] = False
        if not keep.all():
            self.log.append(f"删除 {int((~keep).sum())} 个冗余约束")
        kept_rows = np.flatnonzero(keep)
        T = np.vstack([T[:rows][keep], T[-1:]])
        T = np.hstack([T[:, :n], T[:, -1:]])
        basis = basis[keep]

        # 第二阶段：原目标
        T[-1, :] = 0.0
        T[-1, :n] = self.c
        for r, j in enumerate(basis):
            if self.c[j] != 0.0:
                T[-1] -= self.c[j] * T[r]

        status = self._iterate(T, basis, n, phase=2)
        x = np.zeros(n)
        duals = np.zeros(rows)
        if status == "unbounded":
            return SimplexResult(status, x, duals, -np.inf, self.iterations, kept_rows, self.log)

        x[basis] = T[:-1, -1]
        x[np.abs(x) < tol * 1e-3] = 0.0
        # 对偶变量 y 满足 B_ᵀ y = c_B
        if basis.size:
            B = self.A[np.ix_(kept_rows, basis)]
            y = lstsq(B.T, self.c[basis])[0]
            duals[kept_rows] = y
        objective = float(self.c @ x)
        self.log.append(f"最优：目标 {objective:.12g}，迭代 {self.iterations} 次")
        return SimplexResult("optimal", x, duals, objective, self.iterations, kept_rows, self.log)
