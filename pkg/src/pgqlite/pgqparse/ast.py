"""Syntax tree for the graph query subset and its boolean expressions."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterator, Union


class Direction(Enum):
    FORWARD = "forward"
    BACKWARD = "backward"
    UNDIRECTED = "undirected"


class Quantifier(Enum):
    EXACTLY_ONE = "exactly_one"
    KLEENE_STAR = "kleene_star"


class PathMode(Enum):
    WALK_ALL = "walk_all"
    ANY_SHORTEST = "any_shortest"


class Boundedness(Enum):
    BOUNDED = "bounded"
    UNBOUNDED = "unbounded"


# -- expressions ---------------------------------------------------------------


@dataclass(frozen=True)
class Literal:
    value: Any
    text: str  # source spelling, kept for faithful printing


@dataclass(frozen=True)
class PropertyRef:
    """``var.key`` in a pattern query; ``alias.column`` in SQL."""

    var: str
    key: str


@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class Comparison:
    op: str  # one of = <> != < > <= >=
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class IsNull:
    operand: "Expr"
    negated: bool = False


@dataclass(frozen=True)
class Arithmetic:
    op: str  # + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Negate:
    operand: "Expr"


@dataclass(frozen=True)
class BoolOp:
    op: str  # AND | OR
    operands: tuple["Expr", ...]


@dataclass(frozen=True)
class Not:
    operand: "Expr"


@dataclass(frozen=True)
class Paren:
    inner: "Expr"


Expr = Union[Literal, PropertyRef, VarRef, Comparison, IsNull, Arithmetic, Negate, BoolOp, Not, Paren]


def walk_expr(expr: Any) -> Iterator[Any]:
    yield expr
    if isinstance(expr, (Comparison, Arithmetic)):
        yield from walk_expr(expr.left)
        yield from walk_expr(expr.right)
    elif isinstance(expr, (Not, Negate, IsNull)):
        yield from walk_expr(expr.operand)
    elif isinstance(expr, Paren):
        yield from walk_expr(expr.inner)
    elif isinstance(expr, BoolOp):
        for op in expr.operands:
            yield from walk_expr(op)


def conjuncts(expr: Expr | None) -> list[Expr]:
    """Split a predicate on top-level AND (looking through parentheses)."""
    if expr is None:
        return []
    while isinstance(expr, Paren):
        expr = expr.inner
    if isinstance(expr, BoolOp) and expr.op == "AND":
        out: list[Expr] = []
        for op in expr.operands:
            out.extend(conjuncts(op))
        return out
    return [expr]


def referenced_vars(expr: Expr) -> set[str]:
    out: set[str] = set()
    for node in walk_expr(expr):
        if isinstance(node, PropertyRef):
            out.add(node.var)
        elif isinstance(node, VarRef):
            out.add(node.name)
    return out


# -- patterns ------------------------------------------------------------------


@dataclass(frozen=True)
class Label:
    name: str
    quoted: bool = False

    def matches(self, other: str) -> bool:
        return self.name.lower() == other.lower()


@dataclass(frozen=True)
class NodePattern:
    variable: str | None = None
    label: Label | None = None


@dataclass(frozen=True)
class EdgePattern:
    variable: str | None = None
    label: Label | None = None
    direction: Direction = Direction.FORWARD
    quantifier: Quantifier = Quantifier.EXACTLY_ONE

    @property
    def is_star(self) -> bool:
        return self.quantifier is Quantifier.KLEENE_STAR


@dataclass(frozen=True)
class PathPattern:
    elements: tuple[NodePattern | EdgePattern, ...]
    mode: PathMode = PathMode.WALK_ALL
    variable: str | None = None

    @property
    def nodes(self) -> tuple[NodePattern, ...]:
        return self.elements[0::2]  # type: ignore[return-value]

    @property
    def edges(self) -> tuple[EdgePattern, ...]:
        return self.elements[1::2]  # type: ignore[return-value]

    def hops(self) -> Iterator[tuple[NodePattern, EdgePattern, NodePattern]]:
        for i in range(1, len(self.elements), 2):
            yield self.elements[i - 1], self.elements[i], self.elements[i + 1]  # type: ignore[misc]


@dataclass(frozen=True)
class ReturnItem:
    expr: PropertyRef | VarRef
    alias: str | None = None

    @property
    def output_name(self) -> str:
        if self.alias:
            return self.alias
        if isinstance(self.expr, PropertyRef):
            return f"{self.expr.var}_{self.expr.key}"
        return self.expr.name


@dataclass(frozen=True)
class MatchBody:
    """Patterns plus optional WHERE; also what a bare MATCH fragment parses to."""

    patterns: tuple[PathPattern, ...]
    where: Expr | None = None
    match_keyword: bool = field(default=True, compare=False)  # printing only


@dataclass(frozen=True)
class QueryAst:
    graph_name: str
    patterns: tuple[PathPattern, ...]
    where: Expr | None = None
    return_items: tuple[ReturnItem, ...] = ()
    return_parenthesized: bool = False
    return_keyword: str = "RETURN"
    distinct: bool = False
    select_columns: tuple[str, ...] | None = None  # None means SELECT *
    return_semicolon: bool = False
    trailing_semicolon: bool = False

    @property
    def implicit_all(self) -> bool:
        return self.select_columns is None

    def variables(self) -> list[str]:
        """Distinct element variables in first-appearance order (path variables excluded)."""
        seen: dict[str, None] = {}
        for pat in self.patterns:
            for el in pat.elements:
                if el.variable is not None:
                    seen.setdefault(el.variable)
        return list(seen)

    def node_variables(self) -> list[str]:
        seen: dict[str, None] = {}
        for pat in self.patterns:
            for el in pat.nodes:
                if el.variable is not None:
                    seen.setdefault(el.variable)
        return list(seen)

    def edge_patterns(self) -> Iterator[EdgePattern]:
        for pat in self.patterns:
            yield from pat.edges
