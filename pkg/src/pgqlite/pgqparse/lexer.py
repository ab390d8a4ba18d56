"""Tokenizer shared by the query, DDL and SQL parsers."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import LexError

KEYWORDS = frozenset(
    """
    SELECT FROM WHERE GRAPH_TABLE MATCH RETURN COLUMNS ANY SHORTEST AND OR NOT AS
    DISTINCT CREATE PROPERTY GRAPH VERTEX EDGE TABLES TABLE SOURCE DESTINATION KEY
    REFERENCES PROPERTIES LABEL WITH RECURSIVE UNION ALL JOIN INNER ON EXISTS IS
    NULL TRUE FALSE PRIMARY FOREIGN ORDER BY ASC DESC NO ARE
    """.split()
)

# Punctuation, longest first.
_PUNCT = [
    ("<-[", "EDGE_OPEN_BACK"),
    ("]->", "EDGE_CLOSE_FWD"),
    ("-[", "EDGE_OPEN"),
    ("]-", "EDGE_CLOSE"),
    ("<>", "NEQ"),
    ("!=", "NEQ"),
    ("<=", "LE"),
    (">=", "GE"),
    ("(", "LPAREN"),
    (")", "RPAREN"),
    (",", "COMMA"),
    (".", "DOT"),
    (":", "COLON"),
    (";", "SEMI"),
    ("=", "EQ"),
    ("<", "LT"),
    (">", "GT"),
    ("+", "PLUS"),
    ("-", "MINUS"),
    ("*", "STAR"),
    ("/", "SLASH"),
]


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT, QUOTED, STRING, NUMBER, KEYWORD, EOF or a punctuation kind
    value: str  # canonical: keywords upper-cased, quoted text unescaped
    text: str  # exactly as written
    pos: int
    line: int
    column: int

    def is_kw(self, *words: str) -> bool:
        return self.kind == "KEYWORD" and self.value in words

    def __repr__(self) -> str:
        return f"{self.kind}({self.text!r})"


def _line_col(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def tokenize(text: str) -> list[Token]:
    """Split ``text`` into tokens; the list always ends with an EOF token."""
    tokens: list[Token] = []
    i, n = 0, len(text)

    def emit(kind: str, value: str, start: int, end: int) -> None:
        line, col = _line_col(text, start)
        tokens.append(Token(kind, value, text[start:end], start, line, col))

    def fail(msg: str, at: int) -> LexError:
        line, col = _line_col(text, at)
        return LexError(msg, at, line, col)

    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if text.startswith("--", i):
            nl = text.find("\n", i)
            i = n if nl < 0 else nl + 1
            continue
        if ch.isalpha() or ch == "_":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            if word.upper() in KEYWORDS:
                emit("KEYWORD", word.upper(), i, j)
            else:
                emit("IDENT", word, i, j)
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j + 1 < n and text[j] == "." and text[j + 1].isdigit():
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            if j < n and (text[j].isalpha() or text[j] == "_"):
                raise fail(f"malformed number {text[i:j + 1]!r}", i)
            emit("NUMBER", text[i:j], i, j)
            i = j
            continue
        if ch in "'\"":
            j = i + 1
            buf: list[str] = []
            while True:
                if j >= n:
                    raise fail("unterminated quoted text", i)
                if text[j] == ch:
                    if j + 1 < n and text[j + 1] == ch:
                        buf.append(ch)
                        j += 2
                        continue
                    break
                buf.append(text[j])
                j += 1
            emit("STRING" if ch == "'" else "QUOTED", "".join(buf), i, j + 1)
            i = j + 1
            continue
        for lexeme, kind in _PUNCT:
            if text.startswith(lexeme, i):
                emit(kind, lexeme, i, i + len(lexeme))
                i += len(lexeme)
                break
        else:
            raise fail(f"illegal character {ch!r}", i)
    line, col = _line_col(text, n)
    tokens.append(Token("EOF", "", "", n, line, col))
    return tokens


def token_signature(tokens: list[Token]) -> list[tuple[str, str]]:
    """(kind, value) pairs; equal signatures mean equal text modulo whitespace and keyword case."""
    return [(t.kind, t.value) for t in tokens]
