"""In-memory columnar relations with key metadata and CSV ingestion."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Iterator, TextIO

from .errors import (
    ArityMismatch,
    CsvParseError,
    DuplicatePrimaryKey,
    DuplicateTable,
    InvalidSchema,
    NullInNonNullable,
    UnknownColumn,
    UnknownTable,
    ValueTypeError,
)

Value = Any  # int | float | str | bool | None


class Kind(Enum):
    INT = "INT"
    FLOAT = "FLOAT"
    TEXT = "TEXT"
    BOOL = "BOOL"

    @classmethod
    def from_sql(cls, name: str) -> "Kind":
        try:
            return _SQL_TYPES[name.upper()]
        except KeyError:
            raise InvalidSchema(f"unknown column type {name!r}") from None


_SQL_TYPES = {
    "INT": Kind.INT, "INTEGER": Kind.INT, "BIGINT": Kind.INT, "SMALLINT": Kind.INT,
    "FLOAT": Kind.FLOAT, "DOUBLE": Kind.FLOAT, "REAL": Kind.FLOAT,
    "DECIMAL": Kind.FLOAT, "NUMERIC": Kind.FLOAT,
    "TEXT": Kind.TEXT, "VARCHAR": Kind.TEXT, "CHAR": Kind.TEXT, "STRING": Kind.TEXT,
    "BOOL": Kind.BOOL, "BOOLEAN": Kind.BOOL,
}


def kind_of(value: Value) -> str | None:
    if value is None:
        return None
    if isinstance(value, bool):
        return "bool"
    if isinstance(value, (int, float)):
        return "number"
    if isinstance(value, str):
        return "text"
    raise ValueTypeError(f"unsupported value {value!r}")


def compare_values(left: Value, right: Value, op: str) -> bool | None:
    """Three-valued comparison. ``None`` means unknown (a Null operand)."""
    if left is None or right is None:
        return None
    lk, rk = kind_of(left), kind_of(right)
    if lk != rk:
        raise ValueTypeError(f"cannot compare {lk} {left!r} with {rk} {right!r}")
    if op == "=":
        return left == right
    if op in ("<>", "!="):
        return left != right
    if op == "<":
        return left < right
    if op == ">":
        return left > right
    if op == "<=":
        return left <= right
    if op == ">=":
        return left >= right
    raise ValueError(f"unknown comparison operator {op!r}")


_KIND_RANK = {None: 0, "bool": 1, "number": 2, "text": 3}


def sort_key(value: Value) -> tuple:
    """Total order over values of mixed kinds, for deterministic output."""
    return (_KIND_RANK[kind_of(value)], value if value is not None else 0)


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: Kind
    nullable: bool = True


@dataclass(frozen=True)
class ForeignKey:
    columns: tuple[str, ...]
    target_table: str
    target_columns: tuple[str, ...]


@dataclass(frozen=True)
class TableSchema:
    name: str
    columns: tuple[ColumnSchema, ...]
    primary_key: tuple[str, ...] = ()
    foreign_keys: tuple[ForeignKey, ...] = ()

    def index_of(self, column: str) -> int:
        low = column.lower()
        for i, c in enumerate(self.columns):
            if c.name.lower() == low:
                return i
        raise UnknownColumn(f"{self.name}.{column}")

    def has_column(self, column: str) -> bool:
        low = column.lower()
        return any(c.name.lower() == low for c in self.columns)

    def column(self, name: str) -> ColumnSchema:
        return self.columns[self.index_of(name)]

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)


class Table:
    """A relation stored column-wise; each column is a Python list."""

    def __init__(self, schema: TableSchema) -> None:
        self.schema = schema
        self.columns: list[list[Value]] = [[] for _ in schema.columns]
        self._pk_positions = tuple(schema.index_of(c) for c in schema.primary_key)
        self._pk_index: dict[tuple, int] = {}

    @property
    def name(self) -> str:
        return self.schema.name

    @property
    def row_count(self) -> int:
        return len(self.columns[0]) if self.columns else 0

    def column(self, name: str) -> list[Value]:
        return self.columns[self.schema.index_of(name)]

    def row(self, i: int) -> tuple:
        return tuple(col[i] for col in self.columns)

    def rows(self) -> Iterator[tuple]:
        return zip(*self.columns) if self.columns else iter(())

    def lookup(self, key: tuple) -> int | None:
        """Row index for a primary-key value, or None."""
        return self._pk_index.get(key)

    def append_rows(self, rows: list[tuple]) -> None:
        # All-or-nothing: check keys before touching storage.
        if self._pk_positions:
            staged: dict[tuple, int] = {}
            for n, row in enumerate(rows):
                key = tuple(row[p] for p in self._pk_positions)
                if any(v is None for v in key):
                    raise NullInNonNullable(f"{self.name}: primary key is Null in row {n + 1}")
                if key in self._pk_index or key in staged:
                    raise DuplicatePrimaryKey(f"{self.name}: duplicate primary key {key}")
                staged[key] = self.row_count + n
            self._pk_index.update(staged)
        for row in rows:
            for col, v in zip(self.columns, row):
                col.append(v)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Table):
            return NotImplemented
        return self.schema == other.schema and self.columns == other.columns

    def __repr__(self) -> str:
        return f"Table({self.name!r}, rows={self.row_count})"


@dataclass(frozen=True)
class FkViolation:
    table: str
    row: int
    foreign_key: ForeignKey


@dataclass
class Database:
    """Named tables with case-insensitive lookup and optional name aliases."""

    tables: dict[str, Table] = field(default_factory=dict)
    aliases: dict[str, str] = field(default_factory=dict)

    def _resolve(self, name: str) -> str:
        low = name.lower()
        return self.aliases.get(low, low)

    def has_table(self, name: str) -> bool:
        return self._resolve(name) in self.tables

    def table(self, name: str) -> Table:
        try:
            return self.tables[self._resolve(name)]
        except KeyError:
            raise UnknownTable(name) from None

    def add_alias(self, alias: str, target: str) -> None:
        if not self.has_table(target):
            raise UnknownTable(target)
        if alias.lower() in self.tables:
            raise DuplicateTable(alias)
        self.aliases[alias.lower()] = self._resolve(target)

    def __iter__(self) -> Iterator[Table]:
        return iter(self.tables.values())


def _check_schema(db: Database, schema: TableSchema) -> None:
    seen: set[str] = set()
    for c in schema.columns:
        low = c.name.lower()
        if low in seen:
            raise InvalidSchema(f"{schema.name}: duplicate column {c.name!r}")
        seen.add(low)
    if not schema.columns:
        raise InvalidSchema(f"{schema.name}: no columns")
    for c in schema.primary_key:
        if c.lower() not in seen:
            raise InvalidSchema(f"{schema.name}: primary key column {c!r} does not exist")
    for fk in schema.foreign_keys:
        for c in fk.columns:
            if c.lower() not in seen:
                raise InvalidSchema(f"{schema.name}: foreign key column {c!r} does not exist")
        if fk.target_table.lower() == schema.name.lower():
            target_pk = schema.primary_key
        elif db.has_table(fk.target_table):
            target_pk = db.table(fk.target_table).schema.primary_key
        else:
            raise InvalidSchema(f"{schema.name}: foreign key references unknown table {fk.target_table!r}")
        if [c.lower() for c in fk.target_columns] != [c.lower() for c in target_pk]:
            raise InvalidSchema(
                f"{schema.name}: foreign key must reference the primary key of {fk.target_table}"
            )
        if len(fk.columns) != len(fk.target_columns):
            raise InvalidSchema(f"{schema.name}: foreign key arity mismatch")


def create_table(db: Database, schema: TableSchema) -> Database:
    if db.has_table(schema.name):
        raise DuplicateTable(schema.name)
    _check_schema(db, schema)
    # PK columns are implicitly NOT NULL.
    pk = {c.lower() for c in schema.primary_key}
    if pk:
        cols = tuple(
            ColumnSchema(c.name, c.kind, False) if c.name.lower() in pk else c for c in schema.columns
        )
        schema = TableSchema(schema.name, cols, schema.primary_key, schema.foreign_keys)
    db.tables[schema.name.lower()] = Table(schema)
    return db


_TRUE = {"true", "t", "1", "yes"}
_FALSE = {"false", "f", "0", "no"}


def parse_field(raw: str, col: ColumnSchema, row: int) -> Value:
    if raw == "":
        if not col.nullable:
            raise NullInNonNullable(f"row {row}: column {col.name!r} is not nullable")
        return None
    try:
        if col.kind is Kind.INT:
            return int(raw)
        if col.kind is Kind.FLOAT:
            v = float(raw)
            if math.isnan(v):
                raise ValueError("NaN")
            return v
        if col.kind is Kind.BOOL:
            low = raw.strip().lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(raw)
    except ValueError:
        raise CsvParseError(row, col.name, f"cannot parse {raw!r} as {col.kind.value}") from None
    return raw


def load_csv(db: Database, table: str, source: TextIO | str, header: bool = True) -> Database:
    """Append the records of a CSV stream to ``table``.

    The load is atomic: on any error the table is left unchanged.
    """
    tbl = db.table(table)
    schema = tbl.schema
    stream = io.StringIO(source) if isinstance(source, str) else source
    reader = csv.reader(stream)
    order = list(range(len(schema.columns)))
    rows: list[tuple] = []
    first = True
    for lineno, record in enumerate(reader, start=1):
        if not record:
            continue
        if first and header:
            first = False
            if len(record) != len(schema.columns):
                raise ArityMismatch(f"{schema.name}: header has {len(record)} fields, expected {len(schema.columns)}")
            order = [schema.index_of(name.strip()) for name in record]
            if sorted(order) != list(range(len(schema.columns))):
                raise InvalidSchema(f"{schema.name}: header repeats a column")
            continue
        first = False
        if len(record) != len(schema.columns):
            raise ArityMismatch(f"{schema.name}: line {lineno} has {len(record)} fields, expected {len(schema.columns)}")
        values: list[Value] = [None] * len(schema.columns)
        for raw, pos in zip(record, order):
            values[pos] = parse_field(raw, schema.columns[pos], lineno)
        rows.append(tuple(values))
    tbl.append_rows(rows)
    return db


def format_field(value: Value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_csv(table: Table, header: bool = True) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    if header:
        writer.writerow(table.schema.column_names)
    for row in table.rows():
        writer.writerow([format_field(v) for v in row])
    return out.getvalue()


def validate_foreign_keys(db: Database) -> list[FkViolation]:
    """Every (table, row, fk) whose referenced key is absent. Null keys are skipped."""
    violations: list[FkViolation] = []
    for tbl in db:
        for fk in tbl.schema.foreign_keys:
            target = db.table(fk.target_table)
            cols = [tbl.column(c) for c in fk.columns]
            for i in range(tbl.row_count):
                key = tuple(c[i] for c in cols)
                if any(v is None for v in key):
                    continue
                if target.lookup(key) is None:
                    violations.append(FkViolation(tbl.name, i, fk))
    return violations


def table_schema(name: str, columns: Iterable[tuple[str, Kind] | tuple[str, Kind, bool]],
                 primary_key: Iterable[str] = (),
                 foreign_keys: Iterable[tuple[Iterable[str], str, Iterable[str]]] = ()) -> TableSchema:
    """Shorthand constructor used by tests and the benchmark schema."""
    cols = tuple(ColumnSchema(*c) for c in columns)
    fks = tuple(ForeignKey(tuple(a), t, tuple(b)) for a, t, b in foreign_keys)
    return TableSchema(name, cols, tuple(primary_key), fks)
