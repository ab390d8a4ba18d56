"""``CREATE PROPERTY GRAPH`` / ``CREATE TABLE`` statements: types, parser, printer."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from ..pgqparse.ast import Label
from ..pgqparse.lexer import Token, tokenize
from ..pgqparse.parser import TokenStream
from ..pgqparse.printer import format_ident, format_key, format_label
from ..relstore import ColumnSchema, ForeignKey, Kind, TableSchema


@dataclass(frozen=True)
class KeyReference:
    """``SOURCE KEY (cols) REFERENCES table (cols)``."""

    columns: tuple[str, ...]
    vertex_table: str
    vertex_columns: tuple[str, ...]


@dataclass(frozen=True)
class VertexTableDef:
    table: str
    label: Label | None = None  # None: label defaults to the table name
    properties: tuple[str, ...] | None = None  # None: every column
    key: tuple[str, ...] | None = None  # None: the table's primary key
    properties_clause: str = ""  # "", "list", "all" or "none"; kept for printing

    @property
    def label_name(self) -> str:
        return self.label.name if self.label else self.table


@dataclass(frozen=True)
class EdgeTableDef:
    table: str
    source: KeyReference
    destination: KeyReference
    label: Label | None = None
    properties: tuple[str, ...] | None = None
    key: tuple[str, ...] | None = None
    properties_clause: str = ""

    @property
    def label_name(self) -> str:
        return self.label.name if self.label else self.table


@dataclass(frozen=True)
class PropertyGraphDef:
    name: str
    vertex_tables: tuple[VertexTableDef, ...]
    edge_tables: tuple[EdgeTableDef, ...] = ()
    has_edge_clause: bool = True
    trailing_semicolon: bool = True
    resolved: bool = field(default=False, compare=False)

    def vertex_table(self, table: str) -> VertexTableDef:
        low = table.lower()
        for vt in self.vertex_tables:
            if vt.table.lower() == low:
                return vt
        raise KeyError(table)

    def vertex_by_label(self, label: str) -> VertexTableDef | None:
        low = label.lower()
        return next((vt for vt in self.vertex_tables if vt.label_name.lower() == low), None)

    def edge_by_label(self, label: str) -> EdgeTableDef | None:
        low = label.lower()
        return next((et for et in self.edge_tables if et.label_name.lower() == low), None)

    def labels(self) -> list[str]:
        return [vt.label_name for vt in self.vertex_tables] + [et.label_name for et in self.edge_tables]


@dataclass(frozen=True)
class DdlScript:
    tables: tuple[TableSchema, ...] = ()
    graphs: tuple[PropertyGraphDef, ...] = ()


class DdlParser(TokenStream):
    def parse_script(self) -> DdlScript:
        tables: list[TableSchema] = []
        graphs: list[PropertyGraphDef] = []
        while not self.at("EOF"):
            if self.accept("SEMI"):
                continue
            if self.peek().is_kw("TABLE"):
                tables.append(self.parse_create_table())
            else:
                graphs.append(self.parse_create_graph())
        return DdlScript(tuple(tables), tuple(graphs))

    def parse_columns(self) -> tuple[str, ...]:
        self.expect("LPAREN", "'('")
        cols = [self.expect_ident("column name", allow_keywords=True)]
        while self.accept("COMMA"):
            cols.append(self.expect_ident("column name", allow_keywords=True))
        self.expect("RPAREN", "')'")
        return tuple(cols)

    def parse_label_clause(self) -> Label:
        tok = self.current
        if tok.kind == "QUOTED":
            self.advance()
            return Label(tok.value, True)
        if tok.kind == "IDENT":
            self.advance()
            return Label(tok.value, False)
        raise self.error("label name")

    def parse_properties(self) -> tuple[tuple[str, ...] | None, str]:
        if self.accept_kw("NO"):
            self.expect_kw("PROPERTIES")
            return (), "none"
        self.expect_kw("PROPERTIES")
        if self.accept_kw("ARE"):
            self.expect_kw("ALL")
            self.expect_kw("COLUMNS")
            return None, "all"
        if self.accept_kw("ALL"):
            self.expect_kw("COLUMNS")
            return None, "all"
        return self.parse_columns(), "list"

    def parse_key_reference(self, which: str) -> KeyReference:
        self.expect_kw(which)
        self.expect_kw("KEY")
        cols = self.parse_columns()
        self.expect_kw("REFERENCES")
        table = self.expect_ident("vertex table name")
        return KeyReference(cols, table, self.parse_columns())

    def parse_element_tail(self) -> tuple[Label | None, tuple[str, ...] | None, str]:
        label = None
        props: tuple[str, ...] | None = None
        clause = ""
        while True:
            if self.at_kw("PROPERTIES", "NO") and not clause:
                props, clause = self.parse_properties()
            elif self.at_kw("LABEL") and label is None:
                self.advance()
                label = self.parse_label_clause()
            else:
                return label, props, clause

    def parse_vertex_table(self) -> VertexTableDef:
        table = self.expect_ident("vertex table name")
        key = None
        if self.accept_kw("KEY"):
            key = self.parse_columns()
        label, props, clause = self.parse_element_tail()
        return VertexTableDef(table, label, props, key, clause)

    def parse_edge_table(self) -> EdgeTableDef:
        table = self.expect_ident("edge table name")
        key = None
        if self.accept_kw("KEY"):
            key = self.parse_columns()
        source = self.parse_key_reference("SOURCE")
        destination = self.parse_key_reference("DESTINATION")
        label, props, clause = self.parse_element_tail()
        return EdgeTableDef(table, source, destination, label, props, key, clause)

    def parse_create_graph(self) -> PropertyGraphDef:
        self.expect_kw("CREATE")
        self.expect_kw("PROPERTY")
        self.expect_kw("GRAPH")
        name = self.expect_ident("graph name")
        self.expect_kw("VERTEX")
        self.expect_kw("TABLES")
        self.expect("LPAREN", "'('")
        vertices = [self.parse_vertex_table()]
        while self.accept("COMMA"):
            vertices.append(self.parse_vertex_table())
        self.expect("RPAREN", "')' closing VERTEX TABLES")
        edges: list[EdgeTableDef] = []
        has_edges = False
        if self.accept_kw("EDGE"):
            has_edges = True
            self.expect_kw("TABLES")
            self.expect("LPAREN", "'('")
            if not self.at("RPAREN"):
                edges.append(self.parse_edge_table())
                while self.accept("COMMA"):
                    edges.append(self.parse_edge_table())
            self.expect("RPAREN", "')' closing EDGE TABLES")
        semi = self.accept("SEMI") is not None
        return PropertyGraphDef(name, tuple(vertices), tuple(edges), has_edges, semi)

    def parse_create_table(self) -> TableSchema:
        self.expect_kw("CREATE")
        self.expect_kw("TABLE")
        name = self.expect_ident("table name")
        self.expect("LPAREN", "'('")
        columns: list[ColumnSchema] = []
        pk: list[str] = []
        fks: list[ForeignKey] = []
        while True:
            if self.accept_kw("PRIMARY"):
                self.expect_kw("KEY")
                pk = list(self.parse_columns())
            elif self.accept_kw("FOREIGN"):
                self.expect_kw("KEY")
                cols = self.parse_columns()
                self.expect_kw("REFERENCES")
                target = self.expect_ident("table name")
                fks.append(ForeignKey(cols, target, self.parse_columns()))
            else:
                col = self.expect_ident("column name", allow_keywords=True)
                type_tok = self.current
                if type_tok.kind != "IDENT":
                    raise self.error("column type")
                self.advance()
                if self.accept("LPAREN"):  # VARCHAR(40) and friends
                    self.expect("NUMBER", "type length")
                    while self.accept("COMMA"):
                        self.expect("NUMBER", "type length")
                    self.expect("RPAREN", "')'")
                nullable = True
                while True:
                    if self.accept_kw("NOT"):
                        self.expect_kw("NULL")
                        nullable = False
                    elif self.accept_kw("NULL"):
                        nullable = True
                    elif self.accept_kw("PRIMARY"):
                        self.expect_kw("KEY")
                        pk = [col]
                        nullable = False
                    elif self.accept_kw("REFERENCES"):
                        target = self.expect_ident("table name")
                        fks.append(ForeignKey((col,), target, self.parse_columns()))
                    else:
                        break
                columns.append(ColumnSchema(col, Kind.from_sql(type_tok.value), nullable))
            if not self.accept("COMMA"):
                break
        self.expect("RPAREN", "')' closing the column list")
        self.accept("SEMI")
        return TableSchema(name, tuple(columns), tuple(pk), tuple(fks))


def _tokens(source: str | Sequence[Token]) -> list[Token]:
    return tokenize(source) if isinstance(source, str) else list(source)


def parse_ddl(source: str | Sequence[Token]) -> PropertyGraphDef:
    """Parse exactly one ``CREATE PROPERTY GRAPH`` statement."""
    p = DdlParser(_tokens(source))
    gdef = p.parse_create_graph()
    p.expect_end()
    return gdef


def parse_script(source: str | Sequence[Token]) -> DdlScript:
    """Parse any sequence of ``CREATE TABLE`` and ``CREATE PROPERTY GRAPH`` statements."""
    script = DdlParser(_tokens(source)).parse_script()
    return script


def _cols(cols: Sequence[str]) -> str:
    return "(" + ", ".join(format_key(c) for c in cols) + ")"


def _tail(label: Label | None, props: tuple[str, ...] | None, clause: str, indent: str) -> list[str]:
    out = []
    if clause == "list":
        out.append(f"{indent}PROPERTIES {_cols(props or ())}")
    elif clause == "all":
        out.append(f"{indent}PROPERTIES ARE ALL COLUMNS")
    elif clause == "none":
        out.append(f"{indent}NO PROPERTIES")
    if label is not None:
        out.append(f"{indent}LABEL {format_label(label)}")
    return out


def format_ddl(gdef: PropertyGraphDef) -> str:
    lines = [f"CREATE PROPERTY GRAPH {format_ident(gdef.name)}", "    VERTEX TABLES ("]
    blocks = []
    for vt in gdef.vertex_tables:
        block = [f"        {format_ident(vt.table)}"]
        if vt.key is not None:
            block.append(f"          KEY {_cols(vt.key)}")
        block += _tail(vt.label, vt.properties, vt.properties_clause, "          ")
        blocks.append("\n".join(block))
    lines.append(",\n".join(blocks) + " )")
    if gdef.has_edge_clause:
        lines.append("    EDGE TABLES (")
        blocks = []
        for et in gdef.edge_tables:
            block = [f"        {format_ident(et.table)}"]
            if et.key is not None:
                block.append(f"          KEY {_cols(et.key)}")
            for word, ref in (("SOURCE", et.source), ("DESTINATION", et.destination)):
                block.append(
                    f"          {word} KEY {_cols(ref.columns)} REFERENCES "
                    f"{format_ident(ref.vertex_table)} {_cols(ref.vertex_columns)}"
                )
            block += _tail(et.label, et.properties, et.properties_clause, "          ")
            blocks.append("\n".join(block))
        lines.append(",\n".join(blocks) + " )")
    text = "\n".join(lines)
    return text + (";" if gdef.trailing_semicolon else "")


def format_create_table(schema: TableSchema) -> str:
    parts = []
    for c in schema.columns:
        spec = f"    {format_ident(c.name)} {c.kind.value}"
        if not c.nullable and tuple(schema.primary_key) != (c.name,):
            spec += " NOT NULL"
        parts.append(spec)
    if schema.primary_key:
        parts.append(f"    PRIMARY KEY {_cols(schema.primary_key)}")
    for fk in schema.foreign_keys:
        parts.append(
            f"    FOREIGN KEY {_cols(fk.columns)} REFERENCES {format_ident(fk.target_table)} {_cols(fk.target_columns)}"
        )
    return f"CREATE TABLE {format_ident(schema.name)} (\n" + ",\n".join(parts) + "\n);"

