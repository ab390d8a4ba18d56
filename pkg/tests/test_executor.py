from __future__ import annotations

import pytest
from conftest import multiset
from hypothesis import given, settings
from hypothesis import strategies as st
from oracle import oracle_rows

from pgqlite.bench import DatasetSpec, generate
from pgqlite.errors import ValueTypeError
from pgqlite.executor import PathBinding, ResultTable, execute
from pgqlite.pgqparse import parse_query
from pgqlite.graphcat import parse_script
from pgqlite.session import QUERY_IDS, build_session, builtin_ddl, corpus_query, create_database

GRAPH_HEAD = "SELECT * FROM GRAPH_TABLE ( social_graph MATCH "


def run_both(session, text, depth_limit=2000):
    plan = session.plan(text, depth_limit)
    graph = execute(plan, session.db, session.graph, "graph")
    relational = execute(plan, session.db, session.graph, "relational")
    return graph, relational


class TestResultTable:
    def test_sorted_places_null_first(self):
        t = ResultTable(("a",), [(2,), (None,), (1,)])
        assert t.sorted_rows() == [(None,), (1,), (2,)]

    def test_multiset_keeps_duplicates(self):
        a = ResultTable(("a",), [(1,), (1,), (2,)])
        b = ResultTable(("a",), [(2,), (1,), (1,)])
        c = ResultTable(("a",), [(1,), (2,)])
        assert a.same_multiset(b)
        assert not a.same_multiset(c)
        assert a.distinct().same_multiset(c)

    def test_column_lookup(self):
        t = ResultTable(("a", "b"), [(1, "x")])
        assert t.column("b") == ["x"]


class TestPathBinding:
    def test_follows_and_trail(self):
        src, tgt = [0, 1, 2], [1, 2, 0]
        p = PathBinding((0, 1, 2, 0), (0, 1, 2))
        assert p.follows(src, tgt)
        assert p.is_trail()
        assert (p.source, p.target, p.hops) == (0, 0, 3)

    def test_broken_path(self):
        p = PathBinding((0, 2), (0,))
        assert not p.follows([0], [1])

    def test_repeated_edge_is_not_trail(self):
        assert not PathBinding((0, 0, 0), (0, 0)).is_trail()


class TestExecuteFixture:
    def test_q1_three_rotations(self, fixture_session):
        graph, relational = run_both(fixture_session, corpus_query("Q1"))
        expected = {("Alice", "Bob", "Carol"), ("Bob", "Carol", "Alice"), ("Carol", "Alice", "Bob")}
        assert set(graph.rows) == expected
        assert graph.same_multiset(relational)
        assert len(graph.columns) == 3

    def test_q4_fixture(self, fixture_session):
        graph, relational = run_both(fixture_session, corpus_query("Q4"))
        # 1->2->3->1 and 1->4->5->1 are both transfer triangles.
        assert set(graph.rows) == {(1,), (2,), (3,), (4,), (5,)}
        assert graph.same_multiset(relational)

    def test_acyclic_friends_yield_nothing(self, fixture_session):
        script = parse_script(builtin_ddl())
        db = create_database(script)
        for table in fixture_session.db:
            rows = list(table.rows())
            if table.name == "Friend":
                rows = [r for r in rows if (r[0], r[1]) != (3, 1)]
            db.table(table.name).append_rows(rows)
        session = build_session(db, script)
        graph, relational = run_both(session, corpus_query("Q1"))
        assert graph.rows == [] and relational.rows == []

    def test_type_mismatch_raises(self, fixture_session):
        text = GRAPH_HEAD + "(x:Person) -[f:Friend]-> (y:Person) WHERE x.name > f.since RETURN (x.pid) );"
        for backend in ("graph", "relational"):
            with pytest.raises(ValueTypeError) as info:
                execute(fixture_session.plan(text), fixture_session.db, fixture_session.graph, backend)
            assert isinstance(info.value, TypeError)

    def test_null_comparison_filters_row(self, fixture_session):
        text = GRAPH_HEAD + "(x:Person) WHERE x.name = NULL RETURN (x.pid) );"
        graph, relational = run_both(fixture_session, text)
        assert graph.rows == relational.rows == []

    def test_depth_limit_restricts_star(self, fixture_session):
        text = GRAPH_HEAD + "(x:Account) -[:Transfer]->* (y:Account) WHERE x.aid = 2 RETURN (y.aid) );"
        shallow, shallow_rel = run_both(fixture_session, text, depth_limit=1)
        assert set(shallow.rows) == {(3,)}
        assert shallow.same_multiset(shallow_rel)
        deep, _ = run_both(fixture_session, text, depth_limit=2000)
        assert set(deep.rows) == {(1,), (2,), (3,), (4,), (5,)}

    @pytest.mark.parametrize("qid", QUERY_IDS + ("q1_common_friend",))
    def test_backends_and_oracle_agree(self, fixture_session, qid):
        text = corpus_query(qid)
        graph, relational = run_both(fixture_session, text)
        expected = oracle_rows(fixture_session.db, fixture_session.gdef, parse_query(text))
        assert multiset(graph.rows) == multiset(expected)
        assert multiset(relational.rows) == multiset(expected)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000), people=st.integers(3, 9), transfers=st.integers(3, 30),
       qid=st.sampled_from(QUERY_IDS))
def test_dense_generated_data_matches_oracle(seed, people, transfers, qid):
    spec = DatasetSpec(n_transfers=transfers, seed=seed, n_persons=people, n_accounts=people,
                       n_friends=min(transfers, people * 3))
    session = generate(spec).session()
    text = corpus_query(qid)
    graph, relational = run_both(session, text)
    expected = oracle_rows(session.db, session.gdef, parse_query(text))
    assert multiset(graph.rows) == multiset(expected)
    assert multiset(relational.rows) == multiset(expected)
