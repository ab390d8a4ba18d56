"""Ratio, creation-latency and row-count tables as markdown and CSV.

Layouts (stable):

* ratio table: header ``size,Q1..Q6``; one row per dataset size; each cell is
  relational latency divided by graph latency, so values above 1 mean the
  graph backend was faster.
* creation table: header ``size,graph_creation_ms``; materialize plus CSR builds.
* row-count table: header ``size,Q1..Q6``; rows returned (equal on both backends).

Latencies come from ``time.perf_counter``. A median below the clock
resolution is raised to the resolution so ratios stay finite and positive.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .suite import BenchResult

CLOCK_RESOLUTION_MS = time.get_clock_info("perf_counter").resolution * 1000.0


def _size_key(size: int) -> int:
    return size


@dataclass
class Grid:
    """Values indexed by (size, query) with sizes as rows and queries as columns."""

    title: str
    sizes: list[int]
    queries: list[str]
    cells: dict[tuple[int, str], float | int] = field(default_factory=dict)
    precision: int = 2

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.sizes), len(self.queries)

    def get(self, size: int, query: str) -> float | int | None:
        return self.cells.get((size, query))

    def _fmt(self, value: float | int | None) -> str:
        if value is None:
            return ""
        if isinstance(value, int):
            return str(value)
        return f"{value:.{self.precision}f}"

    def to_markdown(self) -> str:
        head = ["Size"] + self.queries
        lines = ["| " + " | ".join(head) + " |", "|" + "|".join("---" for _ in head) + "|"]
        for s in self.sizes:
            lines.append("| " + " | ".join([str(s)] + [self._fmt(self.get(s, q)) for q in self.queries]) + " |")
        return f"### {self.title}\n\n" + "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["size"] + self.queries)
        for s in self.sizes:
            w.writerow([s] + [self._fmt(self.get(s, q)) for q in self.queries])
        return out.getvalue()


class RatioTable(Grid):
    pass


@dataclass
class CreationTable:
    creation_ms: dict[int, float]
    title: str = "Graph creation latency (ms)"

    @property
    def sizes(self) -> list[int]:
        return sorted(self.creation_ms)

    def to_markdown(self) -> str:
        lines = ["| Size | Graph creation (ms) |", "|---|---|"]
        lines += [f"| {s} | {self.creation_ms[s]:.3f} |" for s in self.sizes]
        return f"### {self.title}\n\n" + "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["size", "graph_creation_ms"])
        for s in self.sizes:
            w.writerow([s, f"{self.creation_ms[s]:.3f}"])
        return out.getvalue()


def _axes(results: Sequence[BenchResult]) -> tuple[list[int], list[str]]:
    sizes = sorted({r.size for r in results}, key=_size_key)
    queries = list(dict.fromkeys(r.query for r in results))
    return sizes, queries


def ratio_table(results: Sequence[BenchResult], numerator: str = "relational",
                denominator: str = "graph") -> RatioTable:
    sizes, queries = _axes(results)
    table = RatioTable("Relational latency / graph latency", sizes, queries)
    lat = {(r.size, r.query, r.backend): r.latency_ms for r in results}
    for s in sizes:
        for q in queries:
            num, den = lat.get((s, q, numerator)), lat.get((s, q, denominator))
            if num is None or den is None:
                continue
            table.cells[(s, q)] = max(num, CLOCK_RESOLUTION_MS) / max(den, CLOCK_RESOLUTION_MS)
    return table


def row_count_table(results: Sequence[BenchResult]) -> Grid:
    sizes, queries = _axes(results)
    grid = Grid("Rows returned", sizes, queries)
    for r in results:
        grid.cells.setdefault((r.size, r.query), r.row_count)
    return grid


def latency_table(results: Sequence[BenchResult], backend: str) -> Grid:
    sizes, queries = _axes(results)
    grid = Grid(f"Median latency, {backend} backend (ms)", sizes, queries, precision=3)
    for r in results:
        if r.backend == backend:
            grid.cells[(r.size, r.query)] = r.latency_ms
    return grid


def emit_reports(results: Sequence[BenchResult], creation_ms: Mapping[int, float] | None = None,
                 out_dir: str | Path | None = None) -> dict[str, str]:
    """Report texts keyed by file name; written under ``out_dir`` when given."""
    if not results:
        raise ValueError("no benchmark results to report")
    ratio = ratio_table(results)
    rows = row_count_table(results)
    texts = {
        "ratio.md": ratio.to_markdown(),
        "ratio.csv": ratio.to_csv(),
        "rows.md": rows.to_markdown(),
        "rows.csv": rows.to_csv(),
    }
    for backend in dict.fromkeys(r.backend for r in results):
        grid = latency_table(results, backend)
        texts[f"latency_{backend}.md"] = grid.to_markdown()
        texts[f"latency_{backend}.csv"] = grid.to_csv()
    if creation_ms:
        creation = CreationTable(dict(creation_ms))
        texts["creation.md"] = creation.to_markdown()
        texts["creation.csv"] = creation.to_csv()
    texts["report.md"] = "\n".join(texts[k] for k in _markdown_order(texts))
    if out_dir is not None:
        root = Path(out_dir)
        root.mkdir(parents=True, exist_ok=True)
        for name, text in texts.items():
            (root / name).write_text(text, encoding="utf-8")
    return texts


def _markdown_order(texts: Iterable[str]) -> list[str]:
    names = [n for n in texts if n.endswith(".md")]
    first = [n for n in ("ratio.md", "creation.md", "rows.md") if n in names]
    return first + sorted(n for n in names if n not in first)
