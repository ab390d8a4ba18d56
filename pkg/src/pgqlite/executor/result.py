"""Result relations and the small records the kernels hand back."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Iterable

from ..errors import UnknownColumn
from ..relstore import sort_key


def row_sort_key(row: tuple) -> tuple:
    return tuple(sort_key(v) for v in row)


@dataclass
class ResultTable:
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.columns = tuple(self.columns)
        width = len(self.columns)
        for row in self.rows:
            if len(row) != width:
                raise ValueError(f"row {row!r} does not have {width} values")

    def __len__(self) -> int:
        return len(self.rows)

    def index_of(self, column: str) -> int:
        low = column.lower()
        for i, c in enumerate(self.columns):
            if c.lower() == low:
                return i
        raise UnknownColumn(column)

    def column(self, name: str) -> list[Any]:
        i = self.index_of(name)
        return [r[i] for r in self.rows]

    def sorted_rows(self) -> list[tuple]:
        return sorted(self.rows, key=row_sort_key)

    def sorted(self) -> "ResultTable":
        return ResultTable(self.columns, self.sorted_rows())

    def multiset(self) -> Counter:
        return Counter(self.rows)

    def same_multiset(self, other: "ResultTable") -> bool:
        return len(self.columns) == len(other.columns) and self.multiset() == other.multiset()

    def distinct(self) -> "ResultTable":
        return ResultTable(self.columns, list(dict.fromkeys(self.rows)))


@dataclass(frozen=True)
class PathBinding:
    """A concrete path u0 -e1-> u1 ... -en-> un."""

    nodes: tuple[int, ...]
    edges: tuple[int, ...]

    @property
    def hops(self) -> int:
        return len(self.edges)

    @property
    def source(self) -> int:
        return self.nodes[0]

    @property
    def target(self) -> int:
        return self.nodes[-1]

    def is_trail(self) -> bool:
        return len(set(self.edges)) == len(self.edges)

    def follows(self, src: list[int], tgt: list[int]) -> bool:
        """True when every edge leads from the previous node to the next one."""
        if len(self.nodes) != len(self.edges) + 1:
            return False
        return all(src[e] == self.nodes[i] and tgt[e] == self.nodes[i + 1] for i, e in enumerate(self.edges))


@dataclass
class FixpointState:
    frontier: set[tuple]
    accumulated: set[tuple]
    depth: int


def table_from(columns: Iterable[str], rows: Iterable[tuple]) -> ResultTable:
    return ResultTable(tuple(columns), list(rows))
