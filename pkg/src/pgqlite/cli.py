"""Command-line entry point: ``pgqlite load|ddl|query|transpile|bench``.

Exit codes: 0 ok, 1 usage, 2 data error, 3 query error, 4 backend mismatch.
Errors are reported on stderr as a single ``error:<category>:<message>`` line.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, TextIO

from . import __version__
from .bench import DEFAULT_REPETITIONS, DEFAULT_SIZES, emit_reports, run_benchmark
from .errors import BackendMismatch, PgqError
from .executor import ResultTable, execute
from .graphcat import format_create_table, format_ddl, parse_script, validate_graph_def
from .pgqparse import parse_query
from .planner import DEFAULT_DEPTH_LIMIT, choose_backend, explain, transpile_to_sql
from .relstore import format_field, validate_foreign_keys
from .session import QUERY_IDS, builtin_ddl, build_session, corpus_query, create_database, load_directory

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_QUERY, EXIT_MISMATCH = 0, 1, 2, 3, 4
DEPTH_ENV = "PGQLITE_DEPTH_LIMIT"
JSON_VERSION = 1


class UsageError(Exception):
    pass


@dataclass
class CliConfig:
    command: str
    data_dir: Path | None = None
    ddl_file: Path | None = None
    depth_limit: int = DEFAULT_DEPTH_LIMIT
    backend: str = "auto"
    output_format: str = "table"
    explain: bool = False
    query: str | None = None
    seed: int = 0
    sizes: tuple[int, ...] = DEFAULT_SIZES
    repetitions: int = DEFAULT_REPETITIONS
    out_dir: Path | None = None

    def __post_init__(self) -> None:
        if self.depth_limit < 1:
            raise UsageError("depth limit must be at least 1")
        if self.command == "bench":
            if not self.sizes:
                raise UsageError("--sizes needs at least one size")
            if any(s <= 0 for s in self.sizes):
                raise UsageError("sizes must be positive")
            if self.repetitions < 1:
                raise UsageError("--repetitions must be at least 1")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _sizes(text: str) -> tuple[int, ...]:
    parts = [p for p in text.replace(" ", "").split(",") if p]
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid size list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pgqlite", description="Graph pattern queries over relational CSV data.")
    parser.add_argument("--version", action="version", version=f"pgqlite {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p: argparse.ArgumentParser, data: bool) -> None:
        if data:
            p.add_argument("--data-dir", type=Path, required=True, help="directory with one <Table>.csv per table")
        p.add_argument("--ddl-file", type=Path, help="CREATE TABLE / CREATE PROPERTY GRAPH script (default: built-in schema)")

    def query_source(p: argparse.ArgumentParser) -> None:
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--query", help="query text, or a corpus id such as Q4")
        g.add_argument("--query-file", type=Path)
        p.add_argument("--depth-limit", type=int, default=None,
                       help=f"recursion bound (default {DEFAULT_DEPTH_LIMIT}, or ${DEPTH_ENV})")

    p = sub.add_parser("load", help="load CSVs and check foreign keys")
    common(p, data=True)

    p = sub.add_parser("ddl", help="parse, validate and pretty-print a DDL script")
    p.add_argument("--ddl-file", type=Path)
    p.add_argument("--data-dir", type=Path, help="also validate the graph against loaded data")

    p = sub.add_parser("query", help="run a MATCH query")
    common(p, data=True)
    query_source(p)
    p.add_argument("--backend", choices=("auto", "relational", "graph"), default="auto")
    p.add_argument("--format", dest="output_format", choices=("table", "csv", "json"), default="table")
    p.add_argument("--explain", action="store_true", help="print the logical plan and backend choice")

    p = sub.add_parser("transpile", help="print equivalent SQL")
    common(p, data=False)
    query_source(p)

    p = sub.add_parser("bench", help="generate datasets and time the corpus on both backends")
    p.add_argument("--sizes", type=_sizes, default=DEFAULT_SIZES, help="comma-separated transfer counts")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repetitions", type=int, default=DEFAULT_REPETITIONS)
    p.add_argument("--out-dir", type=Path, help="write report files here")
    p.add_argument("--depth-limit", type=int, default=None)
    return parser


def _depth_limit(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get(DEPTH_ENV)
    if env is None or env.strip() == "":
        return DEFAULT_DEPTH_LIMIT
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{DEPTH_ENV} must be an integer, got {env!r}") from None


def _query_text(ns: argparse.Namespace) -> str:
    if getattr(ns, "query_file", None) is not None:
        try:
            return ns.query_file.read_text(encoding="utf-8")
        except OSError as exc:
            raise FileNotFoundError(f"cannot read query file {ns.query_file}: {exc.strerror}") from None
    text = ns.query
    if text.strip().upper() in QUERY_IDS or text.strip().lower() == "q1_common_friend":
        return corpus_query(text.strip())
    return text


def config_from_args(argv: Sequence[str] | None) -> CliConfig:
    ns = build_parser().parse_args(argv)
    cfg = CliConfig(
        command=ns.command,
        data_dir=getattr(ns, "data_dir", None),
        ddl_file=getattr(ns, "ddl_file", None),
        depth_limit=_depth_limit(getattr(ns, "depth_limit", None)),
        backend=getattr(ns, "backend", "auto"),
        output_format=getattr(ns, "output_format", "table"),
        explain=getattr(ns, "explain", False),
        seed=getattr(ns, "seed", 0),
        sizes=tuple(getattr(ns, "sizes", DEFAULT_SIZES)),
        repetitions=getattr(ns, "repetitions", DEFAULT_REPETITIONS),
        out_dir=getattr(ns, "out_dir", None),
    )
    if hasattr(ns, "query"):
        cfg.query = _query_text(ns)
    return cfg


# -- rendering ---------------------------------------------------------------------


def _cell(value: object) -> str:
    return "NULL" if value is None else format_field(value)  # type: ignore[arg-type]


def render_table(result: ResultTable) -> str:
    rows = [[_cell(v) for v in row] for row in result.rows]
    widths = [len(c) for c in result.columns]
    for row in rows:
        widths = [max(w, len(c)) for w, c in zip(widths, row)]
    line = lambda cells: " | ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()  # noqa: E731
    out = [line(list(result.columns)), "-+-".join("-" * w for w in widths)]
    out += [line(r) for r in rows]
    n = len(rows)
    out.append(f"({n} row{'s' if n != 1 else ''})")
    return "\n".join(out) + "\n"


def render_csv(result: ResultTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(result.columns)
    for row in result.rows:
        w.writerow([format_field(v) for v in row])
    return buf.getvalue()


def render_json(result: ResultTable, backend: str, plan_text: str | None = None) -> str:
    doc: dict = {
        "version": JSON_VERSION,
        "backend": backend,
        "columns": list(result.columns),
        "rows": [list(r) for r in result.rows],
        "row_count": len(result.rows),
    }
    if plan_text is not None:
        doc["explain"] = plan_text
    return json.dumps(doc) + "\n"


# -- commands ----------------------------------------------------------------------


def _ddl_text(cfg: CliConfig) -> str:
    if cfg.ddl_file is None:
        return builtin_ddl()
    try:
        return cfg.ddl_file.read_text(encoding="utf-8")
    except OSError as exc:
        raise FileNotFoundError(f"cannot read DDL file {cfg.ddl_file}: {exc.strerror}") from None


def _open(cfg: CliConfig):
    script = parse_script(_ddl_text(cfg))
    db = create_database(script)
    assert cfg.data_dir is not None
    if not cfg.data_dir.is_dir():
        raise FileNotFoundError(f"data directory {cfg.data_dir} does not exist")
    load_directory(db, cfg.data_dir)
    return script, db


def _violation_lines(violations) -> list[str]:
    return [f"  {v.table} row {v.row + 1}: ({', '.join(v.foreign_key.columns)}) -> "
            f"{v.foreign_key.target_table}" for v in violations]


def cmd_load(cfg: CliConfig, out: TextIO, err: TextIO) -> int:
    script, db = _open(cfg)
    violations = validate_foreign_keys(db)
    print(f"{len(list(db))} tables loaded, {len(violations)} FK violations", file=out)
    if violations:
        print(f"error:data:{len(violations)} foreign-key violation(s)", file=err)
        for line in _violation_lines(violations):
            print(line, file=err)
        return EXIT_DATA
    build_session(db, script)  # materialize to validate the graph view too
    return EXIT_OK


def cmd_ddl(cfg: CliConfig, out: TextIO, err: TextIO) -> int:
    script = parse_script(_ddl_text(cfg))
    db = create_database(script)
    if cfg.data_dir is not None:
        load_directory(db, cfg.data_dir)
    for schema in script.tables:
        print(format_create_table(schema), file=out)
    for gdef in script.graphs:
        validate_graph_def(db, gdef)
        print(format_ddl(gdef), file=out)
    return EXIT_OK


def cmd_query(cfg: CliConfig, out: TextIO, err: TextIO) -> int:
    script, db = _open(cfg)
    session = build_session(db, script)
    assert cfg.query is not None
    plan = session.plan(cfg.query, cfg.depth_limit)
    choice = choose_backend(plan, session.graph.stats(), cfg.backend)
    result = execute(plan, session.db, session.graph, choice.backend).sorted()
    plan_text = explain(plan, choice) if cfg.explain else None
    if cfg.output_format == "json":
        out.write(render_json(result, choice.backend, plan_text))
        return EXIT_OK
    if plan_text is not None:
        out.write(plan_text + "\n\n")
    out.write(render_csv(result) if cfg.output_format == "csv" else render_table(result))
    return EXIT_OK


def cmd_transpile(cfg: CliConfig, out: TextIO, err: TextIO) -> int:
    script = parse_script(_ddl_text(cfg))
    if not script.graphs:
        raise UsageError("the DDL script defines no property graph")
    db = create_database(script)
    gdef = validate_graph_def(db, script.graphs[0])
    assert cfg.query is not None
    out.write(transpile_to_sql(parse_query(cfg.query), gdef, cfg.depth_limit) + "\n")
    return EXIT_OK


def cmd_bench(cfg: CliConfig, out: TextIO, err: TextIO) -> int:
    report = run_benchmark(cfg.sizes, cfg.seed, cfg.repetitions, depth_limit=cfg.depth_limit)
    texts = emit_reports(report.results, report.creation_ms, cfg.out_dir)
    out.write(texts["report.md"])
    if cfg.out_dir is not None:
        print(f"reports written to {cfg.out_dir}", file=out)
    return EXIT_OK


COMMANDS = {"load": cmd_load, "ddl": cmd_ddl, "query": cmd_query, "transpile": cmd_transpile, "bench": cmd_bench}


def _fail(err: TextIO, category: str, message: str) -> None:
    print(f"error:{category}:{' '.join(str(message).split())}", file=err)


def exit_code_for(exc: PgqError) -> int:
    if isinstance(exc, BackendMismatch):
        return EXIT_MISMATCH
    return EXIT_DATA if exc.category == "data" else EXIT_QUERY


def main(argv: Sequence[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    try:
        cfg = config_from_args(argv)
        return COMMANDS[cfg.command](cfg, out, err)
    except UsageError as exc:
        _fail(err, "usage", str(exc))
        return EXIT_USAGE
    except PgqError as exc:
        _fail(err, exc.category, str(exc))
        return exit_code_for(exc)
    except (FileNotFoundError, IsADirectoryError, UnicodeDecodeError) as exc:
        _fail(err, "data", str(exc))
        return EXIT_DATA
    except ValueError as exc:
        _fail(err, "usage", str(exc))
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    main_exit()
