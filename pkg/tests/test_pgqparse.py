from __future__ import annotations

import pytest
from conftest import golden
from hypothesis import given, settings
from hypothesis import strategies as st

from pgqlite.errors import LexError, PgqError, PgqSyntaxError, UnboundVariable, UnsupportedPattern
from pgqlite.pgqparse import (
    Boundedness,
    Direction,
    PathMode,
    Quantifier,
    classify,
    format_expr,
    format_match_body,
    format_query,
    parse_expression,
    parse_match_body,
    parse_query,
    tokenize,
)
from pgqlite.pgqparse.lexer import token_signature


def same_text(a: str, b: str) -> bool:
    return token_signature(tokenize(a)) == token_signature(tokenize(b))


class TestTokenize:
    def test_edge_lexemes(self):
        kinds = [(t.kind, t.value) for t in tokenize("-[f1:Friend]->")][:-1]
        assert kinds == [("EDGE_OPEN", "-["), ("IDENT", "f1"), ("COLON", ":"), ("IDENT", "Friend"),
                         ("EDGE_CLOSE_FWD", "]->")]

    def test_any_shortest_keywords(self):
        toks = tokenize("ANY SHORTEST")[:-1]
        assert [(t.kind, t.value) for t in toks] == [("KEYWORD", "ANY"), ("KEYWORD", "SHORTEST")]

    def test_backward_and_undirected_arrows(self):
        kinds = [t.kind for t in tokenize("<-[e]- -[e]-")][:-1]
        assert kinds == ["EDGE_OPEN_BACK", "IDENT", "EDGE_CLOSE", "EDGE_OPEN", "IDENT", "EDGE_CLOSE"]

    def test_illegal_character(self):
        with pytest.raises(LexError) as info:
            tokenize("MATCH (x) @")
        assert (info.value.line, info.value.column) == (1, 11)

    def test_positions(self):
        toks = tokenize("SELECT\n  x")
        assert (toks[1].line, toks[1].column) == (2, 3)


class TestParseQuery:
    def test_triangle(self):
        ast = parse_query(golden("triangle.pgq"))
        assert ast.graph_name == "social_graph"
        assert len(ast.patterns) == 3
        names = {el.variable for p in ast.patterns for el in p.elements if el.variable}
        assert names == {"x", "y", "z", "f1", "f2", "f3"}
        assert ast.select_columns is None  # SELECT *
        assert [str(format_expr(i.expr)) for i in ast.return_items] == ["x.name", "y.name", "z.name"]

    def test_transfer_cycle(self):
        ast = parse_query(golden("transfer_cycle.pgq"))
        assert len(ast.patterns) == 1
        path = ast.patterns[0]
        assert path.mode is PathMode.ANY_SHORTEST
        edges = path.elements[1::2]
        assert [e.quantifier for e in edges] == [Quantifier.EXACTLY_ONE] * 2 + [Quantifier.KLEENE_STAR]
        assert ast.return_items == ()

    def test_unbound_where_variable(self):
        text = "SELECT * FROM GRAPH_TABLE (g MATCH (x:Person) WHERE q.city = 'a' RETURN (x.pid));"
        with pytest.raises(UnboundVariable) as info:
            parse_query(text)
        assert info.value.name == "q"

    def test_owner_filter_needs_owner_patterns(self):
        body = golden("transfer_cycle.pgq").replace("RETURN;", golden("owner_filter.pgq") + " RETURN;")
        with pytest.raises(UnboundVariable):
            parse_query(body)

    def test_unbound_return_variable(self):
        with pytest.raises(UnboundVariable):
            parse_query("SELECT * FROM GRAPH_TABLE (g MATCH (x) RETURN (y.pid));")

    def test_star_needs_label(self):
        with pytest.raises(UnsupportedPattern):
            parse_query("SELECT * FROM GRAPH_TABLE (g MATCH (x)-[]->*(y) RETURN (x.aid));")

    def test_star_edge_property_rejected(self):
        text = "SELECT * FROM GRAPH_TABLE (g MATCH (x)-[t:Transfer]->*(y) WHERE t.amount > 1 RETURN (x.aid));"
        with pytest.raises(PgqSyntaxError, match="Kleene star"):
            parse_query(text)

    def test_missing_return(self):
        with pytest.raises(PgqSyntaxError) as info:
            parse_query("SELECT * FROM GRAPH_TABLE (g MATCH (x) );")
        assert info.value.line == 1 and info.value.column > 0

    def test_directions(self):
        ast = parse_query("SELECT * FROM GRAPH_TABLE (g MATCH (a)<-[e:Friend]-(b)-[:Friend]-(c) RETURN (a.pid));")
        dirs = [el.direction for el in ast.patterns[0].elements[1::2]]
        assert dirs == [Direction.BACKWARD, Direction.UNDIRECTED]

    def test_quoted_and_bare_labels_equivalent(self):
        a = parse_query('SELECT * FROM GRAPH_TABLE (g MATCH (x:"Person") RETURN (x.pid));')
        b = parse_query("SELECT * FROM GRAPH_TABLE (g MATCH (x:Person) RETURN (x.pid));")
        assert a.patterns[0].elements[0].label.name == b.patterns[0].elements[0].label.name

    def test_where_snippet(self):
        expr = parse_expression(golden("owner_filter.pgq"))
        assert format_expr(expr) == "px.city <> pz.city AND t1.amount > t2.amount"

    def test_extension_block(self):
        body = parse_match_body(golden("triangle_extension.pgq"))
        assert len(body.patterns) == 6
        assert body.where is not None


class TestClassify:
    def test_triangle_bounded(self):
        assert classify(parse_query(golden("triangle.pgq"))) is Boundedness.BOUNDED

    def test_cycle_unbounded(self):
        assert classify(parse_query(golden("transfer_cycle.pgq"))) is Boundedness.UNBOUNDED

    def test_single_node(self):
        assert classify(parse_query('SELECT * FROM GRAPH_TABLE (g MATCH (x:"Person") RETURN (x.pid));')) \
            is Boundedness.BOUNDED


class TestRoundTrip:
    @pytest.mark.parametrize("name", ["triangle.pgq", "transfer_cycle.pgq"])
    def test_golden_queries(self, name):
        text = golden(name)
        printed = format_query(parse_query(text))
        assert same_text(printed, text)
        assert parse_query(printed) == parse_query(text)

    def test_golden_fragment(self):
        text = golden("triangle_extension.pgq")
        assert same_text(format_match_body(parse_match_body(text)), text)

    def test_corpus(self):
        from pgqlite.session import QUERY_IDS, corpus_query

        for qid in list(QUERY_IDS) + ["q1_common_friend"]:
            text = corpus_query(qid)
            printed = format_query(parse_query(text))
            assert parse_query(printed) == parse_query(text), qid


# -- generated queries -------------------------------------------------------------

LABELS = {"Friend": ("Person", "Person"), "Transfer": ("Account", "Account"), "Owns": ("Person", "Account")}


@st.composite
def pattern_structures(draw):
    """Paths as lists of (label, star, direction) hops over numbered node slots."""
    n_paths = draw(st.integers(1, 3))
    paths = []
    for _ in range(n_paths):
        hops = draw(st.lists(st.tuples(st.sampled_from(sorted(LABELS)), st.booleans(),
                                       st.sampled_from(["->", "<-", "-"])), max_size=3))
        nodes = draw(st.lists(st.integers(0, 4), min_size=len(hops) + 1, max_size=len(hops) + 1))
        shortest = draw(st.booleans())
        paths.append((nodes, hops, shortest))
    return paths


def render(paths, names: list[str], order: list[int] | None = None, distinct: bool = False) -> str:
    order = order if order is not None else list(range(len(paths)))
    out = []
    for k in order:
        nodes, hops, shortest = paths[k]
        parts = [f"({names[nodes[0]]})"]
        for i, (label, star, arrow) in enumerate(hops):
            if star and arrow == "-":
                arrow = "->"
            body = f"[:{label}]"
            edge = {"->": f"-{body}->", "<-": f"<-{body}-", "-": f"-{body}-"}[arrow]
            parts.append(edge + (" *" if star else " ") + f"({names[nodes[i + 1]]})")
        prefix = "ANY SHORTEST " if shortest else ""
        out.append(prefix + " ".join(parts))
    first = names[paths[order[0]][0][0]]
    head = "SELECT DISTINCT *" if distinct else "SELECT *"
    return f"{head} FROM GRAPH_TABLE (g MATCH {', '.join(out)} WHERE {first}.k > 1 RETURN ({first}.k AS out));"


@settings(max_examples=150, deadline=None)
@given(pattern_structures(), st.booleans())
def test_round_trip_generated(paths, distinct):
    text = render(paths, ["a", "b", "c", "d", "e"], distinct=distinct)
    ast = parse_query(text)
    printed = format_query(ast)
    assert parse_query(printed) == ast
    assert same_text(printed, text)


@settings(max_examples=150, deadline=None)
@given(pattern_structures(), st.permutations(["v", "w", "node_x", "q7", "other"]), st.randoms())
def test_classify_invariant_under_reorder_and_rename(paths, renamed, rnd):
    base = classify(parse_query(render(paths, ["a", "b", "c", "d", "e"])))
    order = list(range(len(paths)))
    rnd.shuffle(order)
    again = classify(parse_query(render(paths, list(renamed), order)))
    assert base is again
    stars = any(star for _, hops, _ in paths for _, star, _ in hops)
    assert (base is Boundedness.UNBOUNDED) == stars


VOCAB = ["SELECT", "*", "FROM", "GRAPH_TABLE", "(", ")", "g", "MATCH", "x", "y", ":", "Person", "-[", "]->",
         "<-[", "]-", ",", "WHERE", "x.pid", "=", "1", "'a'", "AND", "OR", "NOT", "RETURN", ";", "ANY",
         "SHORTEST", "p", "AS", ".", "DISTINCT", "+", "IS", "NULL"]


@settings(max_examples=300, deadline=2000)
@given(st.lists(st.sampled_from(VOCAB), max_size=40))
def test_fuzz_terminates_with_known_errors(words):
    try:
        parse_query(" ".join(words))
    except PgqError:
        pass
