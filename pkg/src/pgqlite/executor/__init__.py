"""Plan evaluation, graph kernels and the SQL interpreter."""

from .engine import compile_expr, execute
from .kernels import (
    any_shortest_cycle,
    bfs_reach,
    closes_cycle,
    distances_to,
    hash_join,
    iterate_fixpoint,
    ms_bfs,
    recursive_fixpoint,
    shortest_closing_path,
)
from .result import FixpointState, PathBinding, ResultTable
from .sql import execute_sql, parse_sql

__all__ = [
    "FixpointState",
    "PathBinding",
    "ResultTable",
    "any_shortest_cycle",
    "bfs_reach",
    "closes_cycle",
    "compile_expr",
    "distances_to",
    "execute",
    "execute_sql",
    "hash_join",
    "iterate_fixpoint",
    "ms_bfs",
    "parse_sql",
    "recursive_fixpoint",
    "shortest_closing_path",
]
