"""Synthetic datasets, timed corpus runs and report tables."""

from ..errors import BackendMismatch
from .dataset import CITY_POOL, TABLE_ORDER, Dataset, DatasetSpec, generate, load_bundle, read_manifest, write_bundle
from .report import CreationTable, Grid, RatioTable, emit_reports, latency_table, ratio_table, row_count_table
from .suite import (
    BACKENDS,
    DEFAULT_REPETITIONS,
    DEFAULT_SIZES,
    BenchReport,
    BenchResult,
    default_backends,
    run_benchmark,
    run_suite,
    time_graph_creation,
)

__all__ = [
    "BACKENDS",
    "BackendMismatch",
    "BenchReport",
    "BenchResult",
    "CITY_POOL",
    "CreationTable",
    "DEFAULT_REPETITIONS",
    "DEFAULT_SIZES",
    "Dataset",
    "DatasetSpec",
    "Grid",
    "RatioTable",
    "TABLE_ORDER",
    "default_backends",
    "emit_reports",
    "generate",
    "latency_table",
    "load_bundle",
    "ratio_table",
    "read_manifest",
    "row_count_table",
    "run_benchmark",
    "run_suite",
    "time_graph_creation",
    "write_bundle",
]
