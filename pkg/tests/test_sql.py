from __future__ import annotations

import pytest
from conftest import golden
from hypothesis import given, settings
from hypothesis import strategies as st

from pgqlite.errors import PgqSyntaxError, QueryError, SqlError, UnknownTable
from pgqlite.executor.sql import execute_sql
from pgqlite.relstore import Database, Kind, create_table, table_schema


def tiny_db(edges):
    db = Database()
    create_table(db, table_schema("E", [("s", Kind.INT), ("t", Kind.INT)]))
    db.table("E").append_rows(list(edges))
    return db


class TestSelect:
    def test_projection_and_filter(self, fixture_session):
        out = execute_sql("SELECT name FROM Person WHERE city = 'Paris' ORDER BY name;", fixture_session.db)
        assert out.rows == [("Alice",), ("Bob",)]

    def test_star_and_alias(self, fixture_session):
        out = execute_sql("SELECT p.* FROM Person AS p WHERE p.pid = 3", fixture_session.db)
        assert out.rows == [(3, "Carol", "Berlin")]

    def test_order_desc(self, fixture_session):
        out = execute_sql("SELECT tid, amount FROM Transfer ORDER BY amount DESC", fixture_session.db)
        assert [r[0] for r in out.rows] == [1, 2, 3, 4, 5, 6]

    def test_distinct(self, fixture_session):
        out = execute_sql("SELECT DISTINCT city FROM Person ORDER BY city", fixture_session.db)
        assert out.rows == [("Berlin",), ("Paris",), ("Rome",)]

    def test_join_on(self, fixture_session):
        out = execute_sql(
            "SELECT p.name, a.type FROM Person p JOIN Own o ON p.pid = o.pid "
            "JOIN Account a ON o.aid = a.aid WHERE a.type = 'savings' ORDER BY p.name",
            fixture_session.db)
        assert out.rows == [("Bob", "savings"), ("Eve", "savings")]

    def test_comma_join_matches_explicit_join(self, fixture_session):
        a = execute_sql("SELECT f.pid1, g.pid2 FROM Friend f, Friend g WHERE f.pid2 = g.pid1", fixture_session.db)
        b = execute_sql("SELECT f.pid1, g.pid2 FROM Friend f JOIN Friend g ON f.pid2 = g.pid1", fixture_session.db)
        assert a.same_multiset(b)
        assert len(a.rows) == 7

    def test_union_and_union_all(self):
        db = tiny_db([(1, 2), (1, 2)])
        assert len(execute_sql("SELECT s FROM E UNION ALL SELECT t FROM E", db).rows) == 4
        assert sorted(execute_sql("SELECT s FROM E UNION SELECT t FROM E", db).rows) == [(1,), (2,)]

    def test_exists(self):
        db = tiny_db([(1, 2), (2, 3)])
        out = execute_sql("SELECT a.s FROM E a WHERE EXISTS (SELECT 1 FROM E b WHERE b.s = a.t)", db)
        assert out.rows == [(1,)]

    def test_null_semantics(self):
        db = Database()
        create_table(db, table_schema("N", [("v", Kind.INT, True)]))
        db.table("N").append_rows([(None,), (1,)])
        assert execute_sql("SELECT v FROM N WHERE v = NULL", db).rows == []
        assert execute_sql("SELECT v FROM N WHERE v IS NULL", db).rows == [(None,)]
        assert execute_sql("SELECT v FROM N WHERE NOT (v = 1)", db).rows == []


class TestRecursive:
    def test_transitive_closure(self):
        db = tiny_db([(1, 2), (2, 3), (3, 4)])
        out = execute_sql(
            "WITH RECURSIVE r(a, b) AS (SELECT s, t FROM E UNION SELECT r.a, E.t FROM r JOIN E ON r.b = E.s) "
            "SELECT a, b FROM r ORDER BY a, b", db)
        assert out.rows == [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]

    def test_cycle_listing_on_fixture(self, fixture_session):
        out = execute_sql(golden("recursive_cycle.sql"), fixture_session.db)
        assert {r[0] for r in out.rows} == {1, 2, 3, 4, 5}

    def test_friend_pairs_listing(self, fixture_session):
        out = execute_sql(golden("friend_pairs.sql"), fixture_session.db)
        assert set(out.rows) == {(1, 2), (2, 3), (3, 1)}


class TestErrors:
    @pytest.mark.parametrize("text, error", [
        ("SELECT x FROM Nowhere", UnknownTable),
        ("SELECT nope FROM Person", SqlError),
        ("SELECT p.pid FROM Person p JOIN Person p ON p.pid = p.pid", SqlError),
        ("SELECT FROM Person", PgqSyntaxError),
        ("SELECT pid FROM Person WHERE", PgqSyntaxError),
    ])
    def test_rejected(self, fixture_session, text, error):
        with pytest.raises(error):
            execute_sql(text, fixture_session.db)

    def test_sql_errors_are_query_errors(self):
        assert issubclass(SqlError, QueryError)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)), max_size=20))
def test_recursive_closure_matches_floyd(edges):
    db = tiny_db(edges)
    out = execute_sql(
        "WITH RECURSIVE r(a, b) AS (SELECT s, t FROM E UNION SELECT r.a, E.t FROM r JOIN E ON r.b = E.s) "
        "SELECT a, b FROM r", db)
    reach = set(edges)
    while True:
        more = reach | {(a, d) for a, b in reach for c, d in edges if b == c}
        if more == reach:
            break
        reach = more
    assert set(out.rows) == reach
    assert len(out.rows) == len(reach)
