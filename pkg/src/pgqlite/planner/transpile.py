"""MATCH query to SQL text over the tables underneath the graph view.

Bounded patterns become a chain of inner joins: edge tables joined to the
vertex tables of their endpoints. Each starred edge becomes a depth-limited
``WITH RECURSIVE`` walk seeded from the rows bound so far, so recursion only
starts from anchors that already passed the pushed-down filters.
"""

from __future__ import annotations

from ..errors import UnsupportedPattern
from ..graphcat.ddl import EdgeTableDef, PropertyGraphDef, VertexTableDef
from ..pgqparse.ast import (
    Arithmetic,
    BoolOp,
    Comparison,
    Direction,
    Expr,
    IsNull,
    Literal,
    Negate,
    Not,
    Paren,
    PropertyRef,
    QueryAst,
    VarRef,
)
from ..pgqparse.printer import format_ident
from .lower import DEFAULT_DEPTH_LIMIT, Binding, ClosureStep, EdgeStep, FilterStep, NodeStep, analyse


def _single(cols: tuple[str, ...], what: str) -> str:
    if len(cols) != 1:
        raise UnsupportedPattern(f"composite key in {what}")
    return cols[0]


def _ne(left: str, right: str, cols_a: tuple[str, ...], cols_b: tuple[str, ...]) -> str:
    parts = [f"{left}{format_ident(a)} <> {right}{format_ident(b)}" for a, b in zip(cols_a, cols_b)]
    return parts[0] if len(parts) == 1 else "(" + " OR ".join(parts) + ")"


class _Translator:
    def __init__(self, b: Binding, depth_limit: int) -> None:
        self.b = b
        self.gdef: PropertyGraphDef = b.gdef
        self.limit = depth_limit
        self.ctes: list[str] = []
        self.undirected_ctes: dict[str, str] = {}
        self.recursive = False
        self.joins: list[str] = []  # "FROM ..." then "JOIN ... ON ..."
        self.where: list[str] = []
        self.tables: dict[str, VertexTableDef] = {}  # node variable -> vertex table
        self.closures = 0
        self.empty = False

    # -- naming ------------------------------------------------------------------

    def alias(self, var: str) -> str:
        return format_ident(var)

    def col(self, var: str, column: str) -> str:
        return f"{self.alias(var)}.{format_ident(column)}"

    def vertex_table(self, name: str) -> VertexTableDef:
        return self.gdef.vertex_table(name)

    def edge_def(self, label: str | None) -> EdgeTableDef:
        if label is None:
            raise UnsupportedPattern("unlabeled edge in SQL translation")
        et = self.gdef.edge_by_label(label)
        assert et is not None
        return et

    # -- FROM construction ---------------------------------------------------------

    def add(self, table: str, alias: str, conds: list[str]) -> None:
        if not self.joins:
            self.joins.append(f"FROM {format_ident(table)} AS {alias}")
            self.where[:0] = conds
        else:
            on = " AND ".join(conds) if conds else "1 = 1"
            self.joins.append(f"JOIN {format_ident(table)} AS {alias} ON {on}")

    def node_table_for(self, var: str, fallback: VertexTableDef | None) -> VertexTableDef:
        vt = self.b.vertex_def(var) or fallback
        if vt is None:
            raise UnsupportedPattern(f"node {var!r} has no label to pick a table from")
        return vt

    def bind_endpoint(self, var: str, ref_table: str, ref_vertex_cols: tuple[str, ...],
                      edge_alias: str, edge_cols: tuple[str, ...]) -> list[str]:
        """Conditions tying an edge endpoint to node ``var``; joins the node table when new."""
        vt = self.vertex_table(ref_table)
        conds = [f"{edge_alias}.{format_ident(ec)} = {self.col(var, vc)}" for ec, vc in zip(edge_cols, ref_vertex_cols)]
        if var in self.tables:
            if self.tables[var].table.lower() != vt.table.lower():
                self.empty = True
            return conds
        declared = self.b.vertex_def(var)
        if declared is not None and declared.table.lower() != vt.table.lower():
            self.empty = True
        self.tables[var] = vt
        self.joins.append(f"JOIN {format_ident(vt.table)} AS {self.alias(var)} ON " + " AND ".join(
            f"{self.col(var, vc)} = {edge_alias}.{format_ident(ec)}" for ec, vc in zip(edge_cols, ref_vertex_cols)))
        return []

    def undirected_source(self, et: EdgeTableDef) -> str:
        if et.source.vertex_table.lower() != et.destination.vertex_table.lower():
            raise UnsupportedPattern("undirected edge between different vertex tables")
        name = self.undirected_ctes.get(et.table.lower())
        if name is not None:
            return name
        name = f"{et.table}_undirected"
        src, dst = et.source.columns, et.destination.columns
        props = [p for p in (et.properties or ()) if p.lower() not in {c.lower() for c in src + dst}]
        fwd = [format_ident(c) for c in src + dst] + [format_ident(p) for p in props]
        back = ([f"{format_ident(d)} AS {format_ident(s)}" for s, d in zip(src, dst)]
                + [f"{format_ident(s)} AS {format_ident(d)}" for s, d in zip(src, dst)]
                + [format_ident(p) for p in props])
        table = format_ident(et.table)
        self.ctes.append(
            f"{format_ident(name)} AS (\n"
            f"    SELECT {', '.join(fwd)}\n    FROM {table}\n"
            f"    UNION ALL\n"
            f"    SELECT {', '.join(back)}\n    FROM {table}\n"
            f"    WHERE {_ne('', '', src, dst)} )"
        )
        self.undirected_ctes[et.table.lower()] = name
        return name

    def edge_step(self, step: EdgeStep) -> None:
        et = self.edge_def(step.label)
        alias = self.alias(step.edge)
        if step.direction is Direction.UNDIRECTED:
            table = self.undirected_source(et)
        else:
            table = et.table
        if step.direction is Direction.BACKWARD:
            left_ref, right_ref = et.destination, et.source
        else:
            left_ref, right_ref = et.source, et.destination
        first = not self.joins
        conds: list[str] = []
        pending: list[tuple[str, object]] = []
        for var, ref in ((step.left, left_ref), (step.right, right_ref)):
            if var in self.tables:
                vt = self.vertex_table(ref.vertex_table)
                if self.tables[var].table.lower() != vt.table.lower():
                    self.empty = True
                conds += [f"{alias}.{format_ident(ec)} = {self.col(var, vc)}"
                          for ec, vc in zip(ref.columns, ref.vertex_columns)]
            else:
                pending.append((var, ref))
        if first:
            self.joins.append(f"FROM {format_ident(table)} AS {alias}")
        else:
            self.joins.append(f"JOIN {format_ident(table)} AS {alias} ON " + (" AND ".join(conds) or "1 = 1"))
        done: set[str] = set()
        for var, ref in pending:
            if var in done:  # self-loop pattern: second endpoint compares with the first
                conds2 = [f"{alias}.{format_ident(ec)} = {self.col(var, vc)}"
                          for ec, vc in zip(ref.columns, ref.vertex_columns)]  # type: ignore[attr-defined]
                self.where += conds2
                continue
            self.bind_endpoint(var, ref.vertex_table, ref.vertex_columns, alias, ref.columns)  # type: ignore[attr-defined]
            done.add(var)

    def node_step(self, step: NodeStep) -> None:
        if step.variable in self.tables:
            if step.label is None:
                return
            vt = self.gdef.vertex_by_label(step.label)
            if vt is None or vt.table.lower() != self.tables[step.variable].table.lower():
                self.empty = True
            return
        vt = self.gdef.vertex_by_label(step.label) if step.label else self.b.vertex_def(step.variable)
        if vt is None:
            raise UnsupportedPattern(f"node {step.variable!r} has no label to pick a table from")
        self.tables[step.variable] = vt
        self.add(vt.table, self.alias(step.variable), [])

    def anchor_sql(self, select: str, indent: str = "    ") -> str:
        lines = [select] + [indent + j for j in self.joins]
        conds = self.where
        if conds:
            lines.append(indent + "WHERE " + f"\n{indent}  AND ".join(conds))
        return "\n".join(lines)

    def closure_step(self, step: ClosureStep) -> None:
        et = self.edge_def(step.label)
        self.recursive = True
        self.closures += 1
        n = self.closures
        if step.direction is Direction.BACKWARD:
            out_ref, in_ref = et.destination, et.source
        else:
            out_ref, in_ref = et.source, et.destination
        step_from = format_ident(_single(out_ref.columns, "a recursive step"))
        step_to = format_ident(_single(in_ref.columns, "a recursive step"))
        src_key = _single(out_ref.vertex_columns, "a recursive step")
        tgt_key = _single(in_ref.vertex_columns, "a recursive step")
        src_vt = self.vertex_table(out_ref.vertex_table)
        if self.tables[step.source].table.lower() != src_vt.table.lower():
            self.empty = True
        table = format_ident(et.table)
        paths = f"paths_{n}"
        limit = self.limit
        source_col = self.col(step.source, src_key)
        if step.target in self.tables:
            if self.tables[step.target].table.lower() != in_ref.vertex_table.lower():
                self.empty = True
            seed = self.anchor_sql(
                f"    SELECT DISTINCT {self.col(step.target, tgt_key)}, {source_col}, {source_col}, 1")
            self.ctes.append(
                f"{paths}(a_start, a_origin, a_current, depth) AS (\n{seed}\n"
                f"    UNION\n"
                f"    SELECT p.a_start, p.a_origin, t.{step_to}, p.depth + 1\n"
                f"    FROM {paths} p\n"
                f"    JOIN {table} t ON p.a_current = t.{step_from}\n"
                f"    WHERE p.depth < {limit} )"
            )
            closed = f"closed_{n}"
            self.ctes.append(
                f"{closed}(a_origin, a_start) AS (\n"
                f"    SELECT DISTINCT p.a_origin, p.a_start\n"
                f"    FROM {paths} p\n"
                f"    JOIN {table} t ON p.a_current = t.{step_from}\n"
                f"    WHERE t.{step_to} = p.a_start )"
            )
            self.joins.append(
                f"JOIN {closed} AS {closed} ON {closed}.a_origin = {source_col} "
                f"AND {closed}.a_start = {self.col(step.target, tgt_key)}"
            )
            return
        save = list(self.joins)
        self.joins.append(f"JOIN {table} AS t ON t.{step_from} = {source_col}")
        seed = self.anchor_sql(f"    SELECT DISTINCT {source_col}, t.{step_to}, 1")
        self.joins = save
        self.ctes.append(
            f"{paths}(a_origin, a_current, depth) AS (\n{seed}\n"
            f"    UNION\n"
            f"    SELECT p.a_origin, t.{step_to}, p.depth + 1\n"
            f"    FROM {paths} p\n"
            f"    JOIN {table} t ON p.a_current = t.{step_from}\n"
            f"    WHERE p.depth < {limit} )"
        )
        reach = f"reach_{n}"
        self.ctes.append(f"{reach}(a_origin, a_current) AS (\n    SELECT DISTINCT a_origin, a_current FROM {paths} )")
        self.joins.append(f"JOIN {reach} AS {reach} ON {reach}.a_origin = {source_col}")
        tvt = self.vertex_table(in_ref.vertex_table)
        declared = self.b.vertex_def(step.target)
        if declared is not None and declared.table.lower() != tvt.table.lower():
            self.empty = True
        self.tables[step.target] = tvt
        self.joins.append(f"JOIN {format_ident(tvt.table)} AS {self.alias(step.target)} "
                          f"ON {self.col(step.target, tgt_key)} = {reach}.a_current")

    # -- expressions ---------------------------------------------------------------

    def expr(self, e: Expr) -> str:
        if isinstance(e, Literal):
            return e.text
        if isinstance(e, PropertyRef):
            return self.col(e.var, e.key)
        if isinstance(e, VarRef):
            raise UnsupportedPattern(f"bare variable {e.name!r} in a predicate")
        if isinstance(e, Comparison):
            return f"{self.expr(e.left)} {e.op} {self.expr(e.right)}"
        if isinstance(e, IsNull):
            return f"{self.expr(e.operand)} IS {'NOT ' if e.negated else ''}NULL"
        if isinstance(e, Arithmetic):
            return f"{self.expr(e.left)} {e.op} {self.expr(e.right)}"
        if isinstance(e, Negate):
            return f"-{self.expr(e.operand)}"
        if isinstance(e, BoolOp):
            return f" {e.op} ".join(self.expr(o) for o in e.operands)
        if isinstance(e, Not):
            return f"NOT {self.expr(e.operand)}"
        if isinstance(e, Paren):
            return f"({self.expr(e.inner)})"
        raise UnsupportedPattern(f"expression {e!r}")

    def translate(self) -> str:
        for step in self.b.steps:
            if isinstance(step, EdgeStep):
                self.edge_step(step)
            elif isinstance(step, NodeStep):
                self.node_step(step)
            elif isinstance(step, ClosureStep):
                self.closure_step(step)
            elif isinstance(step, FilterStep):
                self.where.append(self.expr(step.predicate) if not isinstance(step.predicate, BoolOp)
                                  or step.predicate.op == "AND" else f"({self.expr(step.predicate)})")
        items = []
        for out in self.b.outputs:
            if out.key is None:
                raise UnsupportedPattern(f"node {out.variable!r} has no key to return")
            items.append(f"{self.col(out.variable, out.key)} AS {format_ident(out.name)}")
        head = "SELECT DISTINCT" if self.b.ast.distinct else "SELECT"
        if self.empty:
            # A label can never match: the relation is empty whatever the data.
            nulls = ",\n    ".join(f"NULL AS {format_ident(o.name)}" for o in self.b.outputs)
            table = format_ident(next(iter(self.tables.values())).table)
            return f"{head}\n    {nulls}\nFROM {table}\nWHERE 1 = 0;"
        body = self.anchor_sql(head + "\n    " + ",\n    ".join(items), indent="")
        if self.ctes:
            kw = "WITH RECURSIVE" if self.recursive else "WITH"
            return f"{kw} " + ",\n".join(self.ctes) + "\n" + body + ";"
        return body + ";"


def transpile_to_sql(ast: QueryAst, gdef: PropertyGraphDef, depth_limit: int = DEFAULT_DEPTH_LIMIT) -> str:
    """SQL text computing the same relation as ``ast``; recursive only when a star is present."""
    if depth_limit < 1:
        raise ValueError("depth_limit must be at least 1")
    if not gdef.resolved:
        raise UnsupportedPattern("graph definition must be validated against the catalog before translation")
    b = analyse(ast, gdef)
    return _Translator(b, depth_limit).translate()
