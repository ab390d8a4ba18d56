from __future__ import annotations

import threading

import numpy as np
import pytest
from conftest import FIXTURE_DIR, golden
from graphs import edge_graph
from hypothesis import given, settings
from hypothesis import strategies as st

from pgqlite.errors import DanglingEdgeKey, InvalidGraphDef, PgqSyntaxError, UnknownColumn, UnknownLabel, UnknownTable
from pgqlite.graphcat import build_csr, format_ddl, materialize, parse_ddl, parse_script, validate_graph_def
from pgqlite.pgqparse import Direction, tokenize
from pgqlite.pgqparse.lexer import token_signature
from pgqlite.session import builtin_ddl, create_database, load_directory


class TestParseDdl:
    def test_listing_has_two_vertex_and_three_edge_tables(self):
        g = parse_ddl(golden("social_graph.ddl"))
        assert g.name == "social_graph"
        assert [vt.table for vt in g.vertex_tables] == ["Person", "Account"]
        assert [et.label_name for et in g.edge_tables] == ["Friend", "Owns", "Transfer"]

    def test_keyword_named_columns(self):
        g = parse_ddl(golden("social_graph.ddl"))
        transfer = g.edge_tables[2]
        assert transfer.source.columns == ("from",)
        assert transfer.destination.columns == ("to",)
        assert transfer.source.vertex_table == "Account"

    def test_vertices_only(self):
        g = parse_ddl("CREATE PROPERTY GRAPH g VERTEX TABLES ( Person );")
        assert g.edge_tables == ()
        assert g.vertex_tables[0].label_name == "Person"

    def test_truncated_input(self):
        with pytest.raises(PgqSyntaxError):
            parse_ddl("CREATE PROPERTY GRAPH g VERTEX TABLES (")

    def test_syntax_error_carries_position(self):
        with pytest.raises(PgqSyntaxError) as info:
            parse_ddl("CREATE PROPERTY GRAPH g\nVERTEX TABLES ( Person LABEL )")
        assert info.value.line == 2

    def test_round_trip(self):
        text = golden("social_graph.ddl")
        again = format_ddl(parse_ddl(text))
        assert token_signature(tokenize(again)) == token_signature(tokenize(text))
        assert parse_ddl(again) == parse_ddl(text)


def _fixture_db():
    script = parse_script(builtin_ddl())
    db = create_database(script)
    load_directory(db, FIXTURE_DIR)
    return db, script.graphs[0]


class TestValidate:
    def test_defaults_filled(self):
        db, gdef = _fixture_db()
        resolved = validate_graph_def(db, gdef)
        assert resolved.resolved
        person = resolved.vertex_by_label("Person")
        assert person.key == ("pid",)
        owns = resolved.edge_by_label("Owns")
        assert owns.properties == ("pid", "aid")

    def test_unknown_table(self):
        db, _ = _fixture_db()
        with pytest.raises(UnknownTable):
            validate_graph_def(db, parse_ddl("CREATE PROPERTY GRAPH g VERTEX TABLES ( Planet );"))

    def test_unknown_column(self):
        db, _ = _fixture_db()
        with pytest.raises(UnknownColumn):
            validate_graph_def(db, parse_ddl("CREATE PROPERTY GRAPH g VERTEX TABLES ( Person PROPERTIES (age) );"))

    def test_duplicate_labels(self):
        db, _ = _fixture_db()
        text = 'CREATE PROPERTY GRAPH g VERTEX TABLES ( Person LABEL "X", Account LABEL "X" );'
        with pytest.raises(InvalidGraphDef):
            validate_graph_def(db, parse_ddl(text))

    def test_edge_must_reference_declared_vertex_table(self):
        db, _ = _fixture_db()
        text = """CREATE PROPERTY GRAPH g VERTEX TABLES ( Person )
            EDGE TABLES ( Transfer SOURCE KEY (a_from) REFERENCES Account (aid)
                          DESTINATION KEY (a_to) REFERENCES Account (aid) );"""
        with pytest.raises((InvalidGraphDef, UnknownTable)):
            validate_graph_def(db, parse_ddl(text))


class TestMaterialize:
    def test_fixture_counts(self, fixture_session):
        g = fixture_session.graph
        assert g.node_count == 10
        assert g.edge_count == 17
        assert g.stats() == {"|N|": 10, "|E|": 17, "|E:Friend|": 6, "|E:Owns|": 5, "|E:Transfer|": 6}

    def test_node_ids_follow_declaration_then_row_order(self, fixture_session):
        g = fixture_session.graph
        assert [g.node_label(n) for n in range(10)] == ["Person"] * 5 + ["Account"] * 5
        assert g.node_key(0) == (1,) and g.node_key(5) == (1,)
        assert g.node_by_key("Account", (3,)) == 7

    def test_endpoints_and_labels(self, fixture_session):
        g = fixture_session.graph
        transfers = g.edges_with_label("Transfer")
        first = transfers.start
        assert g.lab_edge(first) == frozenset({"Transfer"})
        assert (g.node_key(g.src[first]), g.node_key(g.tgt[first])) == ((1,), (2,))

    def test_props_only_for_declared_keys(self, fixture_session):
        g = fixture_session.graph
        assert g.node_prop(0, "name") == "Alice"
        assert g.node_has_prop(0, "city")
        assert not g.edge_has_prop(g.edges_with_label("Friend").start, "pid1")
        assert g.edge_prop(g.edges_with_label("Friend").start, "since") == 2015

    def test_empty_tables(self):
        script = parse_script(builtin_ddl())
        db = create_database(script)
        g = materialize(db, script.graphs[0])
        assert (g.node_count, g.edge_count) == (0, 0)

    def test_dangling_edge_key(self):
        script = parse_script(builtin_ddl())
        db = create_database(script)
        db.table("Account").append_rows([(1, "checking")])
        db.table("Transfer").append_rows([(1, 1, 2, 5.0)])
        with pytest.raises(DanglingEdgeKey):
            materialize(db, script.graphs[0])

    def test_unknown_label(self, fixture_session):
        with pytest.raises(UnknownLabel):
            fixture_session.graph.edges_with_label("Likes")

    def test_deterministic(self):
        db, gdef = _fixture_db()
        a, b = materialize(db, gdef), materialize(db, gdef)
        assert a.src == b.src and a.tgt == b.tgt
        ca, cb = a.csr("Transfer"), b.csr("Transfer")
        assert np.array_equal(ca.offsets, cb.offsets) and np.array_equal(ca.targets, cb.targets)


class TestCsr:
    def test_three_edge_example(self):
        _, g = edge_graph(3, [(0, 1), (0, 2), (2, 0)])
        csr = build_csr(g, "Link", Direction.FORWARD)
        assert csr.offsets.tolist() == [0, 2, 2, 3]
        assert csr.targets.tolist() == [1, 2, 0]

    def test_empty_bucket(self):
        _, g = edge_graph(3, [(0, 1), (0, 2), (2, 0)])
        csr = build_csr(g, "Link")
        assert csr.offsets[1] == csr.offsets[2]
        assert csr.neighbors(1) == []

    def test_backward_single_edge(self):
        _, g = edge_graph(2, [(0, 1)])
        back = build_csr(g, "Link", Direction.BACKWARD)
        assert back.offsets.tolist() == [0, 0, 1]
        assert back.targets.tolist() == [0]

    def test_bucket_sorted_by_target_then_edge(self):
        _, g = edge_graph(3, [(0, 2), (0, 1), (0, 2)])
        csr = build_csr(g, "Link")
        assert csr.neighbors(0) == [(1, 1), (2, 0), (2, 2)]

    def test_unknown_label(self):
        _, g = edge_graph(2, [(0, 1)])
        with pytest.raises(UnknownLabel):
            build_csr(g, "Nope")

    def test_undirected_rejected(self):
        _, g = edge_graph(2, [(0, 1)])
        with pytest.raises(ValueError):
            build_csr(g, "Link", Direction.UNDIRECTED)

    def test_cache_yields_one_object_under_concurrency(self):
        _, g = edge_graph(50, [(i, (i * 7) % 50) for i in range(50)])
        seen = []
        barrier = threading.Barrier(8)

        def work():
            barrier.wait()
            seen.append(g.csr("Link", Direction.BACKWARD))

        threads = [threading.Thread(target=work) for _ in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len({id(c) for c in seen}) == 1

    def test_label_edge_counts_sum_to_total(self, fixture_session):
        g = fixture_session.graph
        assert sum(g.csr(label).edge_count for label in g.edge_labels) == g.edge_count


graphs = st.integers(1, 50).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=120))
)


def check_csr_invariants(n: int, edges: list[tuple[int, int]]) -> None:
    _, g = edge_graph(n, edges)
    for direction in (Direction.FORWARD, Direction.BACKWARD):
        csr = build_csr(g, "Link", direction)
        offsets = csr.offsets.tolist()
        assert offsets[0] == 0
        assert all(a <= b for a, b in zip(offsets, offsets[1:]))
        assert offsets[n] == len(edges) == csr.edge_count
        assert sorted(csr.edge_ids.tolist()) == list(range(len(edges)))
        for v in range(n):
            for w, e in csr.neighbors(v):
                a, b = edges[e]
                assert (a, b) == ((v, w) if direction is Direction.FORWARD else (w, v))


@settings(max_examples=200, deadline=None)
@given(graphs)
def test_csr_invariants_random(graph):
    check_csr_invariants(*graph)
