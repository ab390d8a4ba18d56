"""A small SQL interpreter: enough of SELECT / JOIN / WITH RECURSIVE to run the
engine's own transpiler output and the cycle and common-friend listings.

Queries are compiled once into closures over row tuples. Inner joins use hash
tables on their equality conjuncts, WHERE conjuncts are applied at the first
join stage that binds all of their columns, and recursive CTEs are evaluated
semi-naively with set semantics on the working table.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

from ..errors import SqlError
from ..pgqparse.ast import Comparison, Expr, Paren, PropertyRef, VarRef, conjuncts, walk_expr
from ..pgqparse.lexer import Token, tokenize
from ..pgqparse.parser import ExprParser
from ..relstore import Database, sort_key
from .engine import compile_expr
from .kernels import join_key
from .result import ResultTable

MAX_ITERATIONS = 100_000


# -- syntax ----------------------------------------------------------------------------


@dataclass(frozen=True)
class Exists:
    query: "QueryBody"


@dataclass(frozen=True)
class SelectItem:
    expr: Expr | None
    alias: str | None = None
    star: str | None = None  # "" for *, a qualifier for q.*


@dataclass(frozen=True)
class TableRef:
    name: str
    alias: str | None = None


@dataclass(frozen=True)
class DerivedRef:
    query: "QueryBody"
    alias: str


Source = Union[TableRef, DerivedRef]


@dataclass(frozen=True)
class JoinClause:
    source: Source
    on: Expr | None  # None: comma (cross) join


@dataclass(frozen=True)
class Select:
    items: tuple[SelectItem, ...]
    sources: tuple[JoinClause, ...]  # first entry has on=None
    where: Expr | None = None
    distinct: bool = False


@dataclass(frozen=True)
class SetOp:
    parts: tuple[Select, ...]
    union_all: tuple[bool, ...]  # flag between parts[i] and parts[i + 1]


QueryBody = Union[Select, SetOp]


@dataclass(frozen=True)
class Cte:
    name: str
    columns: tuple[str, ...] | None
    query: QueryBody


@dataclass(frozen=True)
class SqlStatement:
    ctes: tuple[Cte, ...]
    recursive: bool
    body: QueryBody
    order_by: tuple[tuple[Expr, bool], ...] = ()  # (expression, descending)


class SqlParser(ExprParser):
    def parse_primary(self) -> Expr:
        if self.accept_kw("EXISTS"):
            self.expect("LPAREN", "'(' after EXISTS")
            body = self.parse_body()
            self.expect("RPAREN", "')' closing EXISTS")
            return Exists(body)  # type: ignore[return-value]
        return super().parse_primary()

    def parse_statement(self) -> SqlStatement:
        ctes: list[Cte] = []
        recursive = False
        if self.accept_kw("WITH"):
            recursive = self.accept_kw("RECURSIVE") is not None
            while True:
                name = self.expect_ident("CTE name")
                cols = None
                if self.accept("LPAREN"):
                    cols = [self.expect_ident("column name", allow_keywords=True)]
                    while self.accept("COMMA"):
                        cols.append(self.expect_ident("column name", allow_keywords=True))
                    self.expect("RPAREN", "')'")
                    cols = tuple(cols)
                self.expect_kw("AS")
                self.expect("LPAREN", "'(' opening the CTE body")
                body = self.parse_body()
                self.expect("RPAREN", "')' closing the CTE body")
                ctes.append(Cte(name, cols, body))
                if not self.accept("COMMA"):
                    break
        body = self.parse_body()
        order: list[tuple[Expr, bool]] = []
        if self.accept_kw("ORDER"):
            self.expect_kw("BY")
            while True:
                expr = self.parse_expr()
                desc = False
                if self.accept_kw("DESC"):
                    desc = True
                else:
                    self.accept_kw("ASC")
                order.append((expr, desc))
                if not self.accept("COMMA"):
                    break
        self.accept("SEMI")
        self.expect_end()
        return SqlStatement(tuple(ctes), recursive, body, tuple(order))

    def parse_body(self) -> QueryBody:
        parts = [self.parse_select()]
        flags: list[bool] = []
        while self.accept_kw("UNION"):
            flags.append(self.accept_kw("ALL") is not None)
            parts.append(self.parse_select())
        if len(parts) == 1:
            return parts[0]
        return SetOp(tuple(parts), tuple(flags))

    def parse_select(self) -> Select:
        self.expect_kw("SELECT")
        distinct = self.accept_kw("DISTINCT") is not None
        items = [self.parse_item()]
        while self.accept("COMMA"):
            items.append(self.parse_item())
        sources: list[JoinClause] = []
        if self.accept_kw("FROM"):
            sources.append(JoinClause(self.parse_source(), None))
            while True:
                if self.accept("COMMA"):
                    sources.append(JoinClause(self.parse_source(), None))
                elif self.at_kw("JOIN", "INNER"):
                    self.accept_kw("INNER")
                    self.expect_kw("JOIN")
                    src = self.parse_source()
                    self.expect_kw("ON")
                    sources.append(JoinClause(src, self.parse_expr()))
                else:
                    break
        where = self.parse_expr() if self.accept_kw("WHERE") else None
        return Select(tuple(items), tuple(sources), where, distinct)

    def parse_item(self) -> SelectItem:
        if self.accept("STAR"):
            return SelectItem(None, None, "")
        if self.current.kind in ("IDENT", "QUOTED") and self.peek().kind == "DOT" and self.peek(2).kind == "STAR":
            qual = self.expect_ident()
            self.advance()
            self.advance()
            return SelectItem(None, None, qual)
        expr = self.parse_expr()
        alias = None
        if self.accept_kw("AS"):
            alias = self.expect_ident("column alias", allow_keywords=True)
        elif self.current.kind in ("IDENT", "QUOTED"):
            alias = self.expect_ident()
        return SelectItem(expr, alias)

    def parse_source(self) -> Source:
        if self.accept("LPAREN"):
            body = self.parse_body()
            self.expect("RPAREN", "')' closing the derived table")
            self.accept_kw("AS")
            return DerivedRef(body, self.expect_ident("derived table alias"))
        name = self.expect_ident("table name")
        alias = None
        if self.accept_kw("AS"):
            alias = self.expect_ident("table alias")
        elif self.current.kind in ("IDENT", "QUOTED"):
            alias = self.expect_ident()
        return TableRef(name, alias)


def parse_sql(source: str | Sequence[Token]) -> SqlStatement:
    tokens = tokenize(source) if isinstance(source, str) else list(source)
    return SqlParser(tokens).parse_statement()


# -- evaluation -----------------------------------------------------------------------

Column = tuple[str, str]  # (qualifier, name), both lower-case
Rows = list[tuple]


class Scope:
    """Columns visible at one point of a query, chained to enclosing queries."""

    def __init__(self, columns: Sequence[Column], parent: "Scope | None" = None,
                 deps: list | None = None) -> None:
        self.columns = list(columns)
        self.parent = parent
        self.deps = deps  # collects (scope, index) for outer references
        self.cell: list = [None]  # current row, read by correlated subqueries

    def find(self, qual: str | None, name: str) -> int | None:
        hits = [i for i, (q, n) in enumerate(self.columns) if n == name and (qual is None or q == qual)]
        if len(hits) > 1:
            raise SqlError(f"ambiguous column reference {name!r}")
        return hits[0] if hits else None

    def locate(self, qual: str | None, name: str) -> tuple["Scope", int] | None:
        scope: Scope | None = self
        while scope is not None:
            i = scope.find(qual, name)
            if i is not None:
                return scope, i
            scope = scope.parent
        return None


def _ref_parts(expr: Expr) -> tuple[str | None, str]:
    if isinstance(expr, PropertyRef):
        return expr.var.lower(), expr.key.lower()
    assert isinstance(expr, VarRef)
    return None, expr.name.lower()


@dataclass
class CteHolder:
    columns: list[str]
    rows: Rows = field(default_factory=list)


class Context:
    def __init__(self, db: Database) -> None:
        self.db = db
        self.ctes: dict[str, CteHolder] = {}
        self.table_rows: dict[str, Rows] = {}
        self.index_cache: dict[tuple, dict] = {}
        self.generation = 0  # bumped whenever a CTE working table changes

    def base_rows(self, name: str) -> Rows:
        key = name.lower()
        rows = self.table_rows.get(key)
        if rows is None:
            rows = self.table_rows[key] = list(self.db.table(name).rows())
        return rows


class Compiler:
    def __init__(self, ctx: Context) -> None:
        self.ctx = ctx

    # -- expressions -------------------------------------------------------------

    def expr(self, expr: Expr, scope: Scope) -> Callable[[tuple], object]:
        def resolve(ref: Expr) -> Callable[[tuple], object]:
            if isinstance(ref, Exists):
                return self.exists(ref, scope)
            qual, name = _ref_parts(ref)
            hit = scope.locate(qual, name)
            if hit is None:
                shown = f"{qual}.{name}" if qual else name
                raise SqlError(f"unknown column {shown!r}")
            owner, i = hit
            if owner is scope:
                return lambda row: row[i]
            s: Scope | None = scope
            while s is not None:  # every scope on the way records the outer dependency
                if s.deps is not None:
                    s.deps.append((owner, i))
                if s.parent is owner:
                    break
                s = s.parent
            cell = owner.cell
            return lambda row: cell[0][i]

        return compile_expr(expr, resolve)

    def exists(self, node: Exists, scope: Scope) -> Callable[[tuple], object]:
        deps: list[tuple[Scope, int]] = []
        _, run = self.body(node.query, scope, deps)
        uniq = list(dict.fromkeys((id(s), i) for s, i in deps))
        cells = {id(s): s.cell for s, _ in deps}
        reads = [(cells[sid], i) for sid, i in uniq]
        cache: dict[tuple, bool] = {}
        ctx = self.ctx

        def ev(row: tuple) -> bool:
            key = (ctx.generation,) + tuple(c[0][i] for c, i in reads)
            hit = cache.get(key)
            if hit is None:
                hit = cache[key] = bool(run())
            return hit

        return ev

    # -- sources -----------------------------------------------------------------

    def source(self, src: Source, parent: Scope | None,
               deps: list | None) -> tuple[list[Column], Callable[[], Rows], Callable[[], object] | None]:
        """Columns, a row producer, and a version probe (None: never cache an index on it)."""
        if isinstance(src, DerivedRef):
            cols, run = self.body(src.query, parent, deps)
            qual = src.alias.lower()
            return [(qual, c.lower()) for c in cols], run, None
        qual = (src.alias or src.name).lower()
        holder = self.ctx.ctes.get(src.name.lower())
        if holder is not None:
            ctx = self.ctx
            return [(qual, c.lower()) for c in holder.columns], lambda: holder.rows, lambda: ctx.generation
        table = self.ctx.db.table(src.name)
        rows = self.ctx.base_rows(src.name)
        return [(qual, c.lower()) for c in table.schema.column_names], lambda: rows, lambda: 0

    def _refs(self, expr: Expr) -> list[tuple[str | None, str]] | None:
        """Column references of ``expr``; None when it contains a subquery."""
        out = []
        for node in walk_expr(expr):
            if isinstance(node, Exists):
                return None
            if isinstance(node, (PropertyRef, VarRef)):
                out.append(_ref_parts(node))
        return out

    def _available(self, expr: Expr, local: Scope) -> bool:
        refs = self._refs(expr)
        if refs is None:
            return False
        for qual, name in refs:
            if local.find(qual, name) is None and (local.parent is None or local.parent.locate(qual, name) is None):
                return False
        return True

    def select(self, sel: Select, parent: Scope | None, deps: list | None) -> tuple[list[str], Callable[[], Rows]]:
        if not sel.sources:
            scope = Scope([], parent, deps)
            stages: list = []
            produce: Callable[[], Rows] = lambda: [()]
        else:
            seen: set[str] = set()
            for clause in sel.sources:
                qual = self._qualifier(clause.source)
                if qual in seen:
                    raise SqlError(f"table name {qual!r} specified more than once")
                seen.add(qual)
            pending = conjuncts(sel.where)
            cols0, rows0, _ = self.source(sel.sources[0].source, parent, deps)
            scope = Scope(cols0, parent, deps)
            pending, pre = self._take(pending, scope)
            produce = self._filtered(rows0, pre, scope)
            for clause in sel.sources[1:]:
                rcols, rrows, version = self.source(clause.source, parent, deps)
                left_scope = scope
                right_scope = Scope(rcols, parent, deps)
                scope = Scope(left_scope.columns + rcols, parent, deps)
                on = conjuncts(clause.on) if clause.on is not None else []
                lkeys, rkeys, residual = [], [], []
                for c in on:
                    pair = self._equi(c, left_scope, right_scope)
                    if pair is None:
                        residual.append(c)
                    else:
                        lkeys.append(pair[0])
                        rkeys.append(pair[1])
                pending, extra = self._take(pending, scope)
                produce = self._join(produce, rrows, version, left_scope, right_scope, scope, lkeys, rkeys,
                                     residual + extra)
            if pending:
                produce = self._filtered(produce, pending, scope)
        return self._project(sel, scope, produce)

    @staticmethod
    def _qualifier(src: Source) -> str:
        if isinstance(src, DerivedRef):
            return src.alias.lower()
        return (src.alias or src.name).lower()

    def _take(self, pending: list[Expr], scope: Scope) -> tuple[list[Expr], list[Expr]]:
        keep, take = [], []
        for c in pending:
            (take if self._available(c, scope) else keep).append(c)
        return keep, take

    def _equi(self, c: Expr, left: Scope, right: Scope) -> tuple[Expr, Expr] | None:
        while isinstance(c, Paren):
            c = c.inner
        if not isinstance(c, Comparison) or c.op != "=":
            return None
        lrefs, rrefs = self._refs(c.left), self._refs(c.right)
        if not lrefs or not rrefs:
            return None

        def side(refs: list, scope: Scope) -> bool:
            return all(scope.find(q, n) is not None for q, n in refs)

        if side(lrefs, left) and side(rrefs, right):
            return c.left, c.right
        if side(rrefs, left) and side(lrefs, right):
            return c.right, c.left
        return None

    def _filtered(self, produce: Callable[[], Rows], preds: list[Expr], scope: Scope) -> Callable[[], Rows]:
        if not preds:
            return produce
        compiled = [self.expr(p, scope) for p in preds]
        cell = scope.cell

        def run() -> Rows:
            out = []
            for row in produce():
                cell[0] = row
                if all(p(row) is True for p in compiled):
                    out.append(row)
            return out

        return run

    def _join(self, left: Callable[[], Rows], right: Callable[[], Rows], version: Callable[[], object] | None,
              lscope: Scope,
              rscope: Scope, scope: Scope, lkeys: list[Expr], rkeys: list[Expr],
              residual: list[Expr]) -> Callable[[], Rows]:
        lk = [self.expr(k, lscope) for k in lkeys]
        rk = [self.expr(k, rscope) for k in rkeys]
        res = [self.expr(p, scope) for p in residual]
        cache = self.ctx.index_cache
        cell = scope.cell
        token = object()

        def index_of(rows: Rows) -> dict:
            key = (token, version()) if version is not None else None
            idx = cache.get(key) if key is not None else None
            if idx is None:
                idx = {}
                for r in rows:
                    k = join_key(tuple(f(r) for f in rk))
                    if k is not None:
                        idx.setdefault(k, []).append(r)
                if key is not None:
                    cache[key] = idx
            return idx

        def run() -> Rows:
            lrows = left()
            rrows = right()
            out: Rows = []
            if lk:
                idx = index_of(rrows)
                for lrow in lrows:
                    k = join_key(tuple(f(lrow) for f in lk))
                    if k is None:
                        continue
                    for rrow in idx.get(k, ()):
                        row = lrow + rrow
                        if res:
                            cell[0] = row
                            if not all(p(row) is True for p in res):
                                continue
                        out.append(row)
            else:
                for lrow in lrows:
                    for rrow in rrows:
                        row = lrow + rrow
                        if res:
                            cell[0] = row
                            if not all(p(row) is True for p in res):
                                continue
                        out.append(row)
            return out

        return run

    def _project(self, sel: Select, scope: Scope, produce: Callable[[], Rows]) -> tuple[list[str], Callable[[], Rows]]:
        names: list[str] = []
        getters: list[Callable[[tuple], object]] = []
        for n, item in enumerate(sel.items, 1):
            if item.star is not None:
                qual = item.star.lower() or None
                hits = [(i, c) for i, c in enumerate(scope.columns) if qual is None or c[0] == qual]
                if not hits:
                    raise SqlError(f"no columns for {item.star}.*")
                for i, (_, cname) in hits:
                    names.append(cname)
                    getters.append(lambda row, i=i: row[i])
                continue
            assert item.expr is not None
            getters.append(self.expr(item.expr, scope))
            if item.alias:
                names.append(item.alias)
            elif isinstance(item.expr, PropertyRef):
                names.append(item.expr.key)
            elif isinstance(item.expr, VarRef):
                names.append(item.expr.name)
            else:
                names.append(f"col{n}")
        distinct = sel.distinct
        cell = scope.cell

        def run() -> Rows:
            out = []
            for row in produce():
                cell[0] = row
                out.append(tuple(g(row) for g in getters))
            return list(dict.fromkeys(out)) if distinct else out

        return names, run

    def body(self, body: QueryBody, parent: Scope | None, deps: list | None) -> tuple[list[str], Callable[[], Rows]]:
        if isinstance(body, Select):
            return self.select(body, parent, deps)
        compiled = [self.select(p, parent, deps) for p in body.parts]
        width = len(compiled[0][0])
        if any(len(cols) != width for cols, _ in compiled):
            raise SqlError("UNION branches have different column counts")
        flags = body.union_all

        def run() -> Rows:
            out = list(compiled[0][1]())
            for flag, (_, part) in zip(flags, compiled[1:]):
                out.extend(part())
                if not flag:
                    out = list(dict.fromkeys(out))
            return out

        return compiled[0][0], run


def _references(body: QueryBody, name: str) -> bool:
    parts = body.parts if isinstance(body, SetOp) else (body,)
    low = name.lower()
    for sel in parts:
        for clause in sel.sources:
            src = clause.source
            if isinstance(src, TableRef) and src.name.lower() == low:
                return True
            if isinstance(src, DerivedRef) and _references(src.query, name):
                return True
        exprs = [sel.where] + [c.on for c in sel.sources] + [i.expr for i in sel.items]
        for e in exprs:
            if e is None:
                continue
            for node in walk_expr(e):
                if isinstance(node, Exists) and _references(node.query, name):
                    return True
    return False


def _run_cte(compiler: Compiler, cte: Cte, recursive: bool) -> CteHolder:
    ctx = compiler.ctx
    body = cte.query
    if not (recursive and _references(body, cte.name)):
        cols, run = compiler.body(body, None, None)
        holder = CteHolder(list(cte.columns or cols))
        if len(holder.columns) != len(cols):
            raise SqlError(f"CTE {cte.name} declares {len(holder.columns)} columns but yields {len(cols)}")
        holder.rows = run()
        return holder
    parts = body.parts if isinstance(body, SetOp) else (body,)
    anchors = [p for p in parts if not _references(p, cte.name)]
    steps = [p for p in parts if _references(p, cte.name)]
    if not anchors:
        raise SqlError(f"recursive CTE {cte.name} has no non-recursive branch")
    anchor_cols, _ = compiler.select(anchors[0], None, None)
    holder = CteHolder(list(cte.columns or anchor_cols))
    ctx.ctes[cte.name.lower()] = holder  # visible to the recursive branches
    accumulated: dict[tuple, None] = {}
    for a in anchors:
        _, run = compiler.select(a, None, None)
        for row in run():
            accumulated.setdefault(row)
    delta = list(accumulated)
    step_runs = [compiler.select(s, None, None)[1] for s in steps]
    iterations = 0
    while delta:
        iterations += 1
        if iterations > MAX_ITERATIONS:
            raise SqlError(f"recursive CTE {cte.name} did not converge within {MAX_ITERATIONS} iterations")
        holder.rows = delta
        ctx.generation += 1
        fresh: dict[tuple, None] = {}
        for run in step_runs:
            for row in run():
                if row not in accumulated and row not in fresh:
                    fresh[row] = None
        accumulated.update(fresh)
        delta = list(fresh)
    holder.rows = list(accumulated)
    ctx.generation += 1
    return holder


def execute_sql(statement: str | SqlStatement, db: Database) -> ResultTable:
    """Run one SQL statement against ``db``."""
    stmt = parse_sql(statement) if isinstance(statement, str) else statement
    compiler = Compiler(Context(db))
    for cte in stmt.ctes:
        holder = _run_cte(compiler, cte, stmt.recursive)
        compiler.ctx.ctes[cte.name.lower()] = holder
    cols, run = compiler.body(stmt.body, None, None)
    rows = run()
    if stmt.order_by:
        scope = Scope([("", c.lower()) for c in cols])
        # ORDER BY sees output columns only; a qualifier is accepted and dropped.
        keys = [(compiler.expr(VarRef(e.key) if isinstance(e, PropertyRef) else e, scope), desc)
                for e, desc in stmt.order_by]
        for f, desc in reversed(keys):
            rows.sort(key=lambda r, f=f: sort_key(f(r)), reverse=desc)
    return ResultTable(tuple(cols), rows)
