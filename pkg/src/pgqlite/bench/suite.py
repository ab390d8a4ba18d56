"""Timed runs of the query corpus on both backends."""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from ..errors import BackendMismatch
from ..executor import ResultTable, execute
from ..graphcat import MaterializedGraph, materialize
from ..pgqparse import Boundedness, Direction, classify, parse_query
from ..planner import DEFAULT_DEPTH_LIMIT, LogicalPlan, lower
from ..relstore import Database
from ..session import corpus
from .dataset import DatasetSpec, generate

BackendRunner = Callable[[LogicalPlan, Database, MaterializedGraph], ResultTable]
BACKENDS = ("relational", "graph")
DEFAULT_SIZES = (50, 100, 150)
DEFAULT_REPETITIONS = 5


def _runner(name: str) -> BackendRunner:
    def run(plan: LogicalPlan, db: Database, g: MaterializedGraph) -> ResultTable:
        return execute(plan, db, g, name)
    run.__name__ = f"run_{name}"
    return run


def default_backends() -> dict[str, BackendRunner]:
    return {name: _runner(name) for name in BACKENDS}


@dataclass(frozen=True)
class BenchResult:
    query: str
    backend: str
    size: int
    latency_ms: float  # median of the timed repetitions
    row_count: int
    samples_ms: tuple[float, ...] = ()
    bounded: bool = True


@dataclass
class BenchReport:
    results: list[BenchResult] = field(default_factory=list)
    creation_ms: dict[int, float] = field(default_factory=dict)
    seed: int = 0
    repetitions: int = DEFAULT_REPETITIONS


def time_call(fn: Callable[[], object], repetitions: int, warmup: int = 1) -> tuple[list[float], object]:
    """Discard ``warmup`` calls, then time ``repetitions`` calls; returns milliseconds and the last value."""
    value = None
    for _ in range(warmup):
        value = fn()
    samples = []
    for _ in range(repetitions):
        t0 = time.perf_counter()
        value = fn()
        samples.append((time.perf_counter() - t0) * 1000.0)
    return samples, value


def run_suite(db: Database, graph: MaterializedGraph, queries: Mapping[str, str] | None = None,
              repetitions: int = DEFAULT_REPETITIONS, size: int | None = None,
              backends: Mapping[str, BackendRunner] | None = None,
              depth_limit: int = DEFAULT_DEPTH_LIMIT) -> list[BenchResult]:
    """Per (query, backend): one warm-up, ``repetitions`` timed runs, median reported.

    Parsing and lowering happen before timing. Raises BackendMismatch when the
    backends disagree on the row count of a query.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be at least 1")
    queries = dict(corpus()) if queries is None else dict(queries)
    backends = default_backends() if backends is None else dict(backends)
    if size is None:
        size = db.table("Transfer").row_count if db.has_table("Transfer") else 0
    out: list[BenchResult] = []
    for qid, text in queries.items():
        ast = parse_query(text)
        bounded = classify(ast) is Boundedness.BOUNDED
        plan = lower(ast, graph.gdef, depth_limit)
        counts: dict[str, int] = {}
        for name, run in backends.items():
            samples, result = time_call(lambda: run(plan, db, graph), repetitions)
            counts[name] = len(result.rows)  # type: ignore[attr-defined]
            out.append(BenchResult(qid, name, size, statistics.median(samples), counts[name],
                                   tuple(samples), bounded))
        if len(set(counts.values())) > 1:
            raise BackendMismatch(qid, counts)
    return out


def time_graph_creation(db: Database, graph_def, repetitions: int = DEFAULT_REPETITIONS) -> float:
    """Median milliseconds to materialize the view and build every CSR slice."""
    def build() -> MaterializedGraph:
        g = materialize(db, graph_def)
        for label in g.edge_labels:
            g.csr(label, Direction.FORWARD)
            g.csr(label, Direction.BACKWARD)
        return g
    samples, _ = time_call(build, repetitions)
    return statistics.median(samples)


def run_benchmark(sizes: Sequence[int] = DEFAULT_SIZES, seed: int = 0,
                  repetitions: int = DEFAULT_REPETITIONS, queries: Mapping[str, str] | None = None,
                  backends: Mapping[str, BackendRunner] | None = None,
                  depth_limit: int = DEFAULT_DEPTH_LIMIT) -> BenchReport:
    """Generate one dataset per size and run the suite on each, sequentially."""
    if not sizes:
        raise ValueError("at least one dataset size is required")
    report = BenchReport(seed=seed, repetitions=repetitions)
    for size in sizes:
        session = generate(DatasetSpec(n_transfers=size, seed=seed)).session()
        report.creation_ms[size] = time_graph_creation(session.db, session.gdef, repetitions)
        report.results += run_suite(session.db, session.graph, queries, repetitions, size, backends, depth_limit)
    return report
