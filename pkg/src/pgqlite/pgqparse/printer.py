"""Pretty printer. Output re-tokenizes to the same token stream as the parsed source."""

from __future__ import annotations

import re

from .ast import (
    Arithmetic,
    BoolOp,
    Comparison,
    Direction,
    EdgePattern,
    Expr,
    IsNull,
    Label,
    Literal,
    MatchBody,
    Negate,
    NodePattern,
    Not,
    Paren,
    PathMode,
    PathPattern,
    PropertyRef,
    QueryAst,
    ReturnItem,
    VarRef,
)
from .lexer import KEYWORDS

_BARE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def format_ident(name: str) -> str:
    if _BARE.match(name) and name.upper() not in KEYWORDS:
        return name
    return '"' + name.replace('"', '""') + '"'


def format_key(name: str) -> str:
    # Keywords are legal after a dot, so only non-identifier text needs quoting.
    return name if _BARE.match(name) else format_ident(name)


def format_label(label: Label) -> str:
    if label.quoted:
        return '"' + label.name.replace('"', '""') + '"'
    return label.name


def format_expr(expr: Expr) -> str:
    if isinstance(expr, Literal):
        return expr.text
    if isinstance(expr, PropertyRef):
        return f"{format_ident(expr.var)}.{format_key(expr.key)}"
    if isinstance(expr, VarRef):
        return format_ident(expr.name)
    if isinstance(expr, Comparison):
        return f"{format_expr(expr.left)} {expr.op} {format_expr(expr.right)}"
    if isinstance(expr, IsNull):
        return f"{format_expr(expr.operand)} IS {'NOT ' if expr.negated else ''}NULL"
    if isinstance(expr, Arithmetic):
        return f"{format_expr(expr.left)} {expr.op} {format_expr(expr.right)}"
    if isinstance(expr, Negate):
        return f"-{format_expr(expr.operand)}"
    if isinstance(expr, BoolOp):
        return f" {expr.op} ".join(format_expr(op) for op in expr.operands)
    if isinstance(expr, Not):
        return f"NOT {format_expr(expr.operand)}"
    if isinstance(expr, Paren):
        return f"({format_expr(expr.inner)})"
    raise TypeError(f"cannot format {expr!r}")


def format_node(node: NodePattern) -> str:
    var = format_ident(node.variable) if node.variable else ""
    label = f":{format_label(node.label)}" if node.label else ""
    return f"({var}{label})"


def format_edge(edge: EdgePattern) -> str:
    var = format_ident(edge.variable) if edge.variable else ""
    label = f":{format_label(edge.label)}" if edge.label else ""
    opener = "<-[" if edge.direction is Direction.BACKWARD else "-["
    closer = "]->" if edge.direction is Direction.FORWARD else "]-"
    star = "*" if edge.is_star else ""
    return f"{opener}{var}{label}{closer}{star}"


def format_path(path: PathPattern) -> str:
    head = ""
    if path.variable:
        head += f"{format_ident(path.variable)} = "
    if path.mode is PathMode.ANY_SHORTEST:
        head += "ANY SHORTEST "
    parts = [format_node(path.elements[0])]
    for i in range(1, len(path.elements), 2):
        parts.append(format_edge(path.elements[i]))  # type: ignore[arg-type]
        parts.append(format_node(path.elements[i + 1]))  # type: ignore[arg-type]
    return head + " ".join(parts)


def format_match_body(body: MatchBody, indent: str = "") -> str:
    lines = [indent + "MATCH"] if body.match_keyword else []
    pats = [indent + "  " + format_path(p) for p in body.patterns]
    lines.append(",\n".join(pats))
    if body.where is not None:
        lines.append(indent + "WHERE " + format_expr(body.where))
    return "\n".join(lines)


def format_return_item(item: ReturnItem) -> str:
    text = format_expr(item.expr)
    if item.alias:
        text += f" AS {format_ident(item.alias)}"
    return text


def format_query(ast: QueryAst) -> str:
    select = "SELECT "
    if ast.distinct:
        select += "DISTINCT "
    if ast.select_columns is None:
        select += "*"
    else:
        select += ", ".join(format_ident(c) for c in ast.select_columns)
    ret = ast.return_keyword
    if ast.return_items:
        items = ", ".join(format_return_item(i) for i in ast.return_items)
        ret += f" ({items})" if ast.return_parenthesized else f" {items}"
    if ast.return_semicolon:
        ret += ";"
    body = format_match_body(MatchBody(ast.patterns, ast.where), indent="  ")
    tail = ")" + (";" if ast.trailing_semicolon else "")
    return "\n".join([
        select,
        "FROM GRAPH_TABLE (",
        f"  {format_ident(ast.graph_name)}",
        body,
        f"  {ret} {tail}",
    ])
