"""Exception hierarchy.

Every error carries a ``category`` used by the CLI to build the
``error:<category>:`` prefix and to pick an exit code.
"""

from __future__ import annotations


class PgqError(Exception):
    category = "internal"


# -- data errors (relational storage, graph catalog) -------------------------


class DataError(PgqError):
    category = "data"


class DuplicateTable(DataError):
    pass


class InvalidSchema(DataError):
    pass


class UnknownTable(DataError):
    pass


class UnknownColumn(DataError):
    pass


class CsvParseError(DataError):
    def __init__(self, row: int, column: str, message: str = "") -> None:
        self.row = row
        self.column = column
        super().__init__(f"row {row}, column {column!r}: {message}" if message else f"row {row}, column {column!r}")


class ArityMismatch(DataError):
    pass


class NullInNonNullable(DataError):
    pass


class DuplicatePrimaryKey(DataError):
    pass


class InvalidGraphDef(DataError):
    pass


class DanglingEdgeKey(DataError):
    pass


# -- query errors (lexing, parsing, planning, execution) ---------------------


class QueryError(PgqError):
    category = "query"


class LexError(QueryError):
    category = "lex"

    def __init__(self, message: str, pos: int, line: int, column: int) -> None:
        self.pos = pos
        self.line = line
        self.column = column
        super().__init__(f"{message} at line {line}, column {column}")


class PgqSyntaxError(QueryError):
    category = "syntax"

    def __init__(self, message: str, pos: int = -1, line: int = 0, column: int = 0,
                 expected: str | None = None) -> None:
        self.pos = pos
        self.line = line
        self.column = column
        self.expected = expected
        where = f" at line {line}, column {column}" if line else ""
        super().__init__(f"{message}{where}")


class UnboundVariable(QueryError):
    category = "unbound-variable"

    def __init__(self, name: str) -> None:
        self.name = name
        super().__init__(f"variable {name!r} is not bound by any pattern")


class UnknownLabel(QueryError):
    category = "unknown-label"


class UnknownProperty(QueryError):
    category = "unknown-property"


class UnsupportedPattern(QueryError):
    category = "unsupported"

    def __init__(self, construct: str) -> None:
        self.construct = construct
        super().__init__(f"unsupported construct: {construct}")


class ValueTypeError(QueryError, TypeError):
    """Comparison or arithmetic between incompatible value kinds."""

    category = "type"


class NodeOutOfRange(QueryError):
    category = "node-range"


class SqlError(QueryError):
    category = "sql"


class BackendMismatch(PgqError):
    category = "backend-mismatch"

    def __init__(self, query: str, counts: dict[str, int]) -> None:
        self.query = query
        self.counts = counts
        detail = ", ".join(f"{k}={v}" for k, v in counts.items())
        super().__init__(f"{query}: row counts differ across backends ({detail})")
