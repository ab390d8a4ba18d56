"""Recursive-descent parser for ``SELECT ... FROM GRAPH_TABLE (...)`` queries.

Each ``parse_*`` method expects the stream to be positioned on the first
token of its construct and leaves it one past the last token.
"""

from __future__ import annotations

from dataclasses import replace

from typing import Sequence

from ..errors import PgqSyntaxError, UnboundVariable, UnsupportedPattern
from .ast import (
    Arithmetic,
    BoolOp,
    Boundedness,
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
    Quantifier,
    QueryAst,
    ReturnItem,
    VarRef,
    walk_expr,
)
from .lexer import Token, tokenize

_COMPARISON = {"EQ", "NEQ", "LT", "GT", "LE", "GE"}


class TokenStream:
    def __init__(self, tokens: Sequence[Token]) -> None:
        self.tokens = list(tokens)
        self.i = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.i]

    def peek(self, offset: int = 1) -> Token:
        j = min(self.i + offset, len(self.tokens) - 1)
        return self.tokens[j]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != "EOF":
            self.i += 1
        return tok

    def error(self, expected: str, tok: Token | None = None) -> PgqSyntaxError:
        tok = tok or self.current
        found = "end of input" if tok.kind == "EOF" else repr(tok.text)
        return PgqSyntaxError(f"expected {expected}, found {found}", tok.pos, tok.line, tok.column, expected)

    def at(self, kind: str) -> bool:
        return self.current.kind == kind

    def at_kw(self, *words: str) -> bool:
        return self.current.is_kw(*words)

    def accept(self, kind: str) -> Token | None:
        if self.current.kind == kind:
            return self.advance()
        return None

    def accept_kw(self, word: str) -> Token | None:
        if self.current.is_kw(word):
            return self.advance()
        return None

    def expect(self, kind: str, what: str | None = None) -> Token:
        if self.current.kind != kind:
            raise self.error(what or kind)
        return self.advance()

    def expect_kw(self, word: str) -> Token:
        if not self.current.is_kw(word):
            raise self.error(word)
        return self.advance()

    def expect_ident(self, what: str = "identifier", allow_keywords: bool = False) -> str:
        tok = self.current
        if tok.kind in ("IDENT", "QUOTED") or (allow_keywords and tok.kind == "KEYWORD"):
            self.advance()
            return tok.value if tok.kind != "KEYWORD" else tok.text
        raise self.error(what)

    def expect_end(self) -> None:
        if not self.at("EOF"):
            raise self.error("end of input")


class ExprParser(TokenStream):
    """Boolean/arithmetic expressions; SQL parsing extends ``parse_primary``."""

    def parse_expr(self) -> Expr:
        return self.parse_or()

    def parse_or(self) -> Expr:
        ops = [self.parse_and()]
        while self.accept_kw("OR"):
            ops.append(self.parse_and())
        return ops[0] if len(ops) == 1 else BoolOp("OR", tuple(ops))

    def parse_and(self) -> Expr:
        ops = [self.parse_not()]
        while self.accept_kw("AND"):
            ops.append(self.parse_not())
        return ops[0] if len(ops) == 1 else BoolOp("AND", tuple(ops))

    def parse_not(self) -> Expr:
        if self.accept_kw("NOT"):
            return Not(self.parse_not())
        return self.parse_comparison()

    def parse_comparison(self) -> Expr:
        left = self.parse_additive()
        if self.current.kind in _COMPARISON:
            op = self.advance().text
            return Comparison(op, left, self.parse_additive())
        if self.accept_kw("IS"):
            negated = self.accept_kw("NOT") is not None
            self.expect_kw("NULL")
            return IsNull(left, negated)
        return left

    def parse_additive(self) -> Expr:
        left = self.parse_multiplicative()
        while self.current.kind in ("PLUS", "MINUS"):
            op = self.advance().text
            left = Arithmetic(op, left, self.parse_multiplicative())
        return left

    def parse_multiplicative(self) -> Expr:
        left = self.parse_unary()
        while self.current.kind in ("STAR", "SLASH"):
            op = self.advance().text
            left = Arithmetic(op, left, self.parse_unary())
        return left

    def parse_unary(self) -> Expr:
        if self.accept("MINUS"):
            return Negate(self.parse_unary())
        return self.parse_primary()

    def parse_primary(self) -> Expr:
        tok = self.current
        if tok.kind == "NUMBER":
            self.advance()
            value = float(tok.text) if "." in tok.text else int(tok.text)
            return Literal(value, tok.text)
        if tok.kind == "STRING":
            self.advance()
            return Literal(tok.value, tok.text)
        if tok.is_kw("TRUE", "FALSE"):
            self.advance()
            return Literal(tok.value == "TRUE", tok.text)
        if tok.is_kw("NULL"):
            self.advance()
            return Literal(None, tok.text)
        if tok.kind in ("IDENT", "QUOTED"):
            name = self.expect_ident()
            if self.accept("DOT"):
                return PropertyRef(name, self.expect_ident("property name", allow_keywords=True))
            return VarRef(name)
        if self.accept("LPAREN"):
            inner = self.parse_expr()
            self.expect("RPAREN", "')'")
            return Paren(inner)
        raise self.error("expression")


class QueryParser(ExprParser):
    def parse_query(self) -> QueryAst:
        self.expect_kw("SELECT")
        distinct = self.accept_kw("DISTINCT") is not None
        if self.accept("STAR"):
            select_columns = None
        else:
            cols = [self.expect_ident("column name or '*'")]
            while self.accept("COMMA"):
                cols.append(self.expect_ident("column name"))
            select_columns = tuple(cols)
        self.expect_kw("FROM")
        self.expect_kw("GRAPH_TABLE")
        self.expect("LPAREN", "'('")
        graph_name = self.expect_ident("graph name")
        self.expect_kw("MATCH")
        body = self.parse_match_body()
        if self.at_kw("RETURN", "COLUMNS"):
            keyword = self.advance().value
        else:
            raise self.error("RETURN")
        items, parenthesized = self.parse_return_items()
        return_semicolon = self.accept("SEMI") is not None
        self.expect("RPAREN", "')'")
        trailing = self.accept("SEMI") is not None
        self.expect_end()
        ast = QueryAst(
            graph_name=graph_name,
            patterns=body.patterns,
            where=body.where,
            return_items=items,
            return_parenthesized=parenthesized,
            return_keyword=keyword,
            distinct=distinct,
            select_columns=select_columns,
            return_semicolon=return_semicolon,
            trailing_semicolon=trailing,
        )
        check_scopes(ast)
        return ast

    def parse_match_body(self) -> MatchBody:
        patterns = [self.parse_path_pattern()]
        while self.accept("COMMA"):
            patterns.append(self.parse_path_pattern())
        where = None
        if self.accept_kw("WHERE"):
            where = self.parse_expr()
        return MatchBody(tuple(patterns), where)

    def parse_path_pattern(self) -> PathPattern:
        variable = None
        if self.current.kind == "IDENT" and self.peek().kind == "EQ":
            variable = self.advance().value
            self.advance()
        mode = PathMode.WALK_ALL
        if self.accept_kw("ANY"):
            self.expect_kw("SHORTEST")
            mode = PathMode.ANY_SHORTEST
        elements: list[NodePattern | EdgePattern] = [self.parse_node()]
        while self.current.kind in ("EDGE_OPEN", "EDGE_OPEN_BACK"):
            elements.append(self.parse_edge())
            elements.append(self.parse_node())
        return PathPattern(tuple(elements), mode, variable)

    def parse_label(self) -> Label:
        tok = self.current
        if tok.kind == "QUOTED":
            self.advance()
            return Label(tok.value, True)
        if tok.kind == "IDENT":
            self.advance()
            return Label(tok.value, False)
        raise self.error("label")

    def parse_node(self) -> NodePattern:
        self.expect("LPAREN", "'(' starting a node pattern")
        variable = None
        if self.at("IDENT"):
            variable = self.advance().value
        label = None
        if self.accept("COLON"):
            label = self.parse_label()
        self.expect("RPAREN", "')' closing a node pattern")
        return NodePattern(variable, label)

    def parse_edge(self) -> EdgePattern:
        opener = self.advance()
        variable = None
        if self.at("IDENT"):
            variable = self.advance().value
        label = None
        if self.accept("COLON"):
            label = self.parse_label()
        closer = self.current
        if closer.kind == "EDGE_CLOSE_FWD":
            if opener.kind == "EDGE_OPEN_BACK":
                raise self.error("']-' closing a backward edge")
            direction = Direction.FORWARD
        elif closer.kind == "EDGE_CLOSE":
            direction = Direction.BACKWARD if opener.kind == "EDGE_OPEN_BACK" else Direction.UNDIRECTED
        else:
            raise self.error("']->' or ']-'")
        self.advance()
        quantifier = Quantifier.KLEENE_STAR if self.accept("STAR") else Quantifier.EXACTLY_ONE
        return EdgePattern(variable, label, direction, quantifier)

    def parse_return_items(self) -> tuple[tuple[ReturnItem, ...], bool]:
        if self.at("SEMI") or self.at("RPAREN"):
            return (), False
        parenthesized = self.accept("LPAREN") is not None
        items = [self.parse_return_item()]
        while self.accept("COMMA"):
            items.append(self.parse_return_item())
        if parenthesized:
            self.expect("RPAREN", "')' closing the RETURN list")
        return tuple(items), parenthesized

    def parse_return_item(self) -> ReturnItem:
        name = self.expect_ident("variable")
        expr: PropertyRef | VarRef
        if self.accept("DOT"):
            expr = PropertyRef(name, self.expect_ident("property name", allow_keywords=True))
        else:
            expr = VarRef(name)
        alias = None
        if self.accept_kw("AS"):
            alias = self.expect_ident("column alias")
        return ReturnItem(expr, alias)


def check_scopes(ast: QueryAst) -> None:
    """Reject unbound references and conflicting variable kinds."""
    kinds: dict[str, str] = {}
    star_edges: set[str] = set()

    def declare(name: str, kind: str) -> None:
        prior = kinds.setdefault(name, kind)
        if prior != kind:
            raise PgqSyntaxError(f"variable {name!r} used both as {prior} and {kind}")

    for pat in ast.patterns:
        if pat.variable is not None:
            declare(pat.variable, "path")
        for el in pat.elements:
            if isinstance(el, EdgePattern) and el.is_star and el.label is None:
                raise UnsupportedPattern("Kleene star over an unlabeled edge")
            if el.variable is None:
                continue
            if isinstance(el, NodePattern):
                declare(el.variable, "node")
            else:
                declare(el.variable, "edge")
                if el.is_star:
                    star_edges.add(el.variable)

    def check(name: str) -> None:
        if name not in kinds:
            raise UnboundVariable(name)
        if kinds[name] == "path":
            raise PgqSyntaxError(f"path variable {name!r} cannot be referenced")
        if name in star_edges:
            raise PgqSyntaxError(f"edge variable {name!r} under a Kleene star has no single binding")

    if ast.where is not None:
        for node in walk_expr(ast.where):
            if isinstance(node, PropertyRef):
                check(node.var)
            elif isinstance(node, VarRef):
                check(node.name)
    for item in ast.return_items:
        check(item.expr.var if isinstance(item.expr, PropertyRef) else item.expr.name)
    if ast.select_columns is not None:
        names = {item.output_name.lower() for item in ast.return_items}
        for col in ast.select_columns:
            if ast.return_items and col.lower() not in names:
                raise UnboundVariable(col)


def _tokens(source: str | Sequence[Token]) -> list[Token]:
    return tokenize(source) if isinstance(source, str) else list(source)


def parse_query(source: str | Sequence[Token]) -> QueryAst:
    return QueryParser(_tokens(source)).parse_query()


def parse_match_body(source: str | Sequence[Token]) -> MatchBody:
    """Parse a bare ``pattern, pattern ... [WHERE expr]`` fragment."""
    p = QueryParser(_tokens(source))
    keyword = bool(p.accept_kw("MATCH"))
    body = p.parse_match_body()
    p.expect_end()
    return replace(body, match_keyword=keyword)


def parse_expression(source: str | Sequence[Token]) -> Expr:
    p = QueryParser(_tokens(source))
    p.accept_kw("WHERE")
    expr = p.parse_expr()
    p.expect_end()
    return expr


def classify(ast: QueryAst | MatchBody) -> Boundedness:
    for pat in ast.patterns:
        if any(e.is_star for e in pat.edges):
            return Boundedness.UNBOUNDED
    return Boundedness.BOUNDED
