from __future__ import annotations

import pytest
from conftest import golden, multiset

from pgqlite.errors import UnsupportedPattern
from pgqlite.executor import execute_sql, parse_sql
from pgqlite.pgqparse import parse_query
from pgqlite.planner import transpile_to_sql
from pgqlite.session import QUERY_IDS, corpus_query


def run_sql(session, text):
    return execute_sql(parse_sql(text), session.db)


class TestShape:
    def test_bounded_has_no_recursion(self, fixture_session):
        sql = transpile_to_sql(parse_query(golden("triangle.pgq")), fixture_session.gdef)
        assert "RECURSIVE" not in sql
        assert sql.rstrip().endswith(";") and sql.count(";") == 1

    def test_unbounded_recursive_cte(self, fixture_session):
        sql = transpile_to_sql(parse_query(golden("transfer_cycle.pgq")), fixture_session.gdef)
        assert sql.startswith("WITH RECURSIVE")
        assert "p.depth + 1" in sql
        assert "p.depth < 2000" in sql
        assert "t.a_to = p.a_start" in sql

    def test_depth_configurable(self, fixture_session):
        sql = transpile_to_sql(parse_query(corpus_query("Q4")), fixture_session.gdef, depth_limit=17)
        assert "p.depth < 17" in sql

    def test_zero_edge_pattern(self, fixture_session):
        ast = parse_query('SELECT * FROM GRAPH_TABLE (social_graph MATCH (x:"Person") RETURN (x.name));')
        sql = transpile_to_sql(ast, fixture_session.gdef)
        assert sql == "SELECT\n    x.name AS x_name\nFROM Person AS x;"

    def test_undirected_uses_symmetric_cte(self, fixture_session):
        sql = transpile_to_sql(parse_query(corpus_query("q1_common_friend")), fixture_session.gdef)
        assert "UNION ALL" in sql and "pid1 <> pid2" in sql

    def test_requires_resolved_definition(self):
        from pgqlite.graphcat import parse_ddl

        with pytest.raises(UnsupportedPattern):
            transpile_to_sql(parse_query(golden("triangle.pgq")), parse_ddl(golden("social_graph.ddl")))

    def test_star_from_unlabeled_source_resolves_via_edge(self, fixture_session):
        ast = parse_query("SELECT * FROM GRAPH_TABLE (social_graph MATCH (x)-[:Transfer]->*(y) RETURN (x.aid));")
        assert "reach_1" in transpile_to_sql(ast, fixture_session.gdef)

    def test_unlabeled_isolated_node(self, fixture_session):
        ast = parse_query("SELECT * FROM GRAPH_TABLE (social_graph MATCH (x) RETURN (x.pid));")
        with pytest.raises(UnsupportedPattern):
            transpile_to_sql(ast, fixture_session.gdef)


@pytest.mark.parametrize("qid", list(QUERY_IDS) + ["q1_common_friend"])
def test_equivalent_on_fixture(fixture_session, qid):
    text = corpus_query(qid)
    expected, _ = fixture_session.run(text)
    got = run_sql(fixture_session, transpile_to_sql(parse_query(text), fixture_session.gdef))
    assert got.columns == expected.columns
    assert multiset(got.rows) == multiset(expected.rows)


@pytest.mark.parametrize("match, ret", [
    ("(x:Person)<-[f:Friend]-(y:Person) WHERE f.since >= 2017", "x.pid, y.pid, f.since"),
    ("(x:Person)-[:Friend]->(x:Person)", "x.pid"),
    ("(x:Person)-[:Transfer]->(y)", "x.pid"),
    ("(a:Account)<-[:Transfer]-*(b:Account)", "a.aid, b.aid"),
    ("(p:Person)-[:Owns]->(a:Account)-[:Transfer]->*(b:Account)", "p.name, b.aid"),
    ("(x:Person), (y:Person) WHERE x.city = y.city AND x.pid < y.pid", "x.pid, y.pid"),
    ("(x:Person)-[:Friend]-(y:Person) WHERE NOT (x.city = 'Paris' OR y.city = 'Rome')", "x.pid, y.pid"),
])
def test_equivalent_ad_hoc(fixture_session, match, ret):
    text = f"SELECT * FROM GRAPH_TABLE (social_graph MATCH {match} RETURN ({ret}));"
    expected, _ = fixture_session.run(text)
    got = run_sql(fixture_session, transpile_to_sql(parse_query(text), fixture_session.gdef))
    assert multiset(got.rows) == multiset(expected.rows)


class TestListings:
    def test_friend_pairs_listing_runs_verbatim(self, fixture_session):
        got = run_sql(fixture_session, golden("friend_pairs.sql"))
        expected, _ = fixture_session.run(corpus_query("q1_common_friend"))
        assert multiset(got.rows) == multiset(expected.rows)
        assert multiset(got.rows) == multiset([(1, 2), (2, 3), (3, 1)])

    def test_recursive_listing_runs_verbatim(self, fixture_session):
        got = run_sql(fixture_session, golden("recursive_cycle.sql"))
        assert got.columns == ("account_in_cycle",)
        assert got.rows == [(1,), (2,), (3,), (4,), (5,)]  # ORDER BY applied
