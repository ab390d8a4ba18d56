"""Tokenizer, parser and printer for the SQL/PGQ query subset."""

from .ast import (
    Boundedness,
    Direction,
    EdgePattern,
    MatchBody,
    NodePattern,
    PathMode,
    PathPattern,
    Quantifier,
    QueryAst,
    ReturnItem,
)
from .lexer import Token, tokenize
from .parser import classify, parse_expression, parse_match_body, parse_query
from .printer import format_expr, format_match_body, format_query

__all__ = [
    "Boundedness",
    "Direction",
    "EdgePattern",
    "MatchBody",
    "NodePattern",
    "PathMode",
    "PathPattern",
    "Quantifier",
    "QueryAst",
    "ReturnItem",
    "Token",
    "classify",
    "format_expr",
    "format_match_body",
    "format_query",
    "parse_expression",
    "parse_match_body",
    "parse_query",
    "tokenize",
]
