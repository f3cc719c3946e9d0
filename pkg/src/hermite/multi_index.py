from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import List, Tuple

from errors import ParameterError


@dataclass(frozen=True, order=True)
class MultiIndex:
    """多重指标 J ∈ N^m"""

    entries: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(int(e) for e in self.entries))
        if any(e < 0 for e in self.entries):
            raise ParameterError(f"多重指标的分量必须非负：{self.entries}")

    @property
    def total_degree(self) -> int:
        return sum(self.entries)

    @property
    def dimension(self) -> int:
        return len(self.entries)

    def sort_key(self):
        """分级字典序：先按总次数升序，同次数内第一个分量大的在前"""
        return (self.total_degree, tuple(-e for e in self.entries))

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __repr__(self):
        return f"J{self.entries}"


def _compositions(total: int, parts: int) -> List[Tuple[int, ...]]:
    # 隔板法枚举 total 分成 parts 个非负整数
    result = []
    for bars in combinations(range(total + parts - 1), parts - 1):
        previous = -1
        entry = []
        for b in bars:
            entry.append(b - previous - 1)
            previous = b
        entry.append(total + parts - 1 - previous - 1)
        result.append(tuple(entry))
    return result


@lru_cache(maxsize=64)
def multi_indices(m: int, max_degree: int) -> Tuple[MultiIndex, ...]:
    """按分级字典序枚举所有 |J| ≤ max_degree 的 m 维多重指标"""
    indices = []
    for total in range(max_degree + 1):
        block = [MultiIndex(c) for c in _compositions(total, m)]
        block.sort(key=MultiIndex.sort_key)
        indices.extend(block)
    return tuple(indices)
