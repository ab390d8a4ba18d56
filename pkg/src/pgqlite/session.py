"""Glue for loading a dataset directory and running queries against it."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import PgqError, UnknownTable
from .executor import ResultTable, execute
from .graphcat import MaterializedGraph, PropertyGraphDef, materialize, parse_script, validate_graph_def
from .graphcat.ddl import DdlScript
from .pgqparse import parse_query
from .planner import BackendChoice, LogicalPlan, choose_backend, lower
from .planner.lower import DEFAULT_DEPTH_LIMIT
from .relstore import Database, FkViolation, create_table, load_csv, validate_foreign_keys

# Spellings used for the same tables in prose and in the graph definition.
STANDARD_ALIASES = {"Friends": "Friend", "Owns": "Own"}

QUERY_IDS = ("Q1", "Q2", "Q3", "Q4", "Q5", "Q6")


class MissingInput(PgqError):
    category = "data"


def builtin_ddl() -> str:
    return resources.files("pgqlite.corpus").joinpath("social.ddl").read_text(encoding="utf-8")


def corpus_query(name: str) -> str:
    """Query text from the shipped corpus, e.g. ``"Q4"`` or ``"q1_common_friend"``."""
    return resources.files("pgqlite.corpus").joinpath(f"{name.lower()}.pgq").read_text(encoding="utf-8")


def corpus() -> dict[str, str]:
    return {qid: corpus_query(qid) for qid in QUERY_IDS}


def create_database(script: DdlScript) -> Database:
    db = Database()
    for schema in script.tables:
        create_table(db, schema)
    for alias, target in STANDARD_ALIASES.items():
        if db.has_table(target) and not db.has_table(alias):
            db.add_alias(alias, target)
    return db


def load_directory(db: Database, data_dir: str | Path) -> list[FkViolation]:
    """Load ``<table>.csv`` for every table of ``db`` and report foreign-key violations."""
    root = Path(data_dir)
    for table in db:
        path = root / f"{table.name}.csv"
        if not path.is_file():
            raise MissingInput(f"missing input file {path}")
        with path.open(newline="", encoding="utf-8") as fh:
            load_csv(db, table.name, fh)
    return validate_foreign_keys(db)


@dataclass
class Session:
    db: Database
    gdef: PropertyGraphDef
    graph: MaterializedGraph
    violations: list[FkViolation]

    def plan(self, query: str, depth_limit: int = DEFAULT_DEPTH_LIMIT) -> LogicalPlan:
        return lower(parse_query(query), self.gdef, depth_limit)

    def run(self, query: str, backend: str = "auto",
            depth_limit: int = DEFAULT_DEPTH_LIMIT) -> tuple[ResultTable, BackendChoice]:
        plan = self.plan(query, depth_limit)
        choice = choose_backend(plan, self.graph.stats(), backend)
        return execute(plan, self.db, self.graph, choice.backend), choice


def build_session(db: Database, script: DdlScript, graph_name: str | None = None) -> Session:
    if not script.graphs:
        raise UnknownTable("the DDL defines no property graph")
    gdef = script.graphs[0]
    if graph_name is not None:
        matches = [g for g in script.graphs if g.name.lower() == graph_name.lower()]
        if not matches:
            raise UnknownTable(f"graph {graph_name}")
        gdef = matches[0]
    violations = validate_foreign_keys(db)
    resolved = validate_graph_def(db, gdef)
    return Session(db, resolved, materialize(db, resolved), violations)


def open_session(data_dir: str | Path, ddl_text: str | None = None) -> Session:
    """Create tables from the DDL, load the directory's CSVs and materialize the graph."""
    script = parse_script(ddl_text if ddl_text is not None else builtin_ddl())
    db = create_database(script)
    load_directory(db, data_dir)
    return build_session(db, script)
