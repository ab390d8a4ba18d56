"""Logical plans, backend choice and SQL transpilation."""

from .lower import DEFAULT_DEPTH_LIMIT, analyse, lower
from .plan import (
    BackendChoice,
    Distinct,
    Filter,
    HashJoin,
    LogicalPlan,
    OutputColumn,
    Project,
    RecursiveFixpoint,
    ScanEdges,
    ScanNodes,
    TraverseClosure,
    choose_backend,
    explain,
    to_relational,
)
from .transpile import transpile_to_sql

__all__ = [
    "BackendChoice",
    "DEFAULT_DEPTH_LIMIT",
    "Distinct",
    "Filter",
    "HashJoin",
    "LogicalPlan",
    "OutputColumn",
    "Project",
    "RecursiveFixpoint",
    "ScanEdges",
    "ScanNodes",
    "TraverseClosure",
    "analyse",
    "choose_backend",
    "explain",
    "lower",
    "to_relational",
    "transpile_to_sql",
]
