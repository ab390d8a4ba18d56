from __future__ import annotations

import io
import json
import shutil
import subprocess
import sys

import pytest
from conftest import FIXTURE_DIR

from pgqlite.cli import EXIT_DATA, EXIT_OK, EXIT_QUERY, EXIT_USAGE, main

DATA = ["--data-dir", str(FIXTURE_DIR)]

Q1_TABLE = """\
x_name | y_name | z_name
-------+--------+-------
Alice  | Bob    | Carol
Bob    | Carol  | Alice
Carol  | Alice  | Bob
(3 rows)
"""


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


class TestQuery:
    def test_q1_table_golden(self):
        code, out, err = run("query", *DATA, "--query", "Q1")
        assert (code, out, err) == (EXIT_OK, Q1_TABLE, "")

    def test_backends_print_the_same(self):
        outs = {run("query", *DATA, "--query", "Q4", "--backend", b, "--format", "csv")[1]
                for b in ("graph", "relational", "auto")}
        assert outs == {"account_in_cycle\n1\n2\n3\n4\n5\n"}

    def test_json_document(self):
        code, out, _ = run("query", *DATA, "--query", "Q4", "--format", "json", "--explain")
        doc = json.loads(out)
        assert code == EXIT_OK
        assert doc["version"] == 1
        assert doc["row_count"] == len(doc["rows"]) == 5
        assert doc["columns"] == ["account_in_cycle"]
        assert "TraverseClosure" in doc["explain"]

    def test_explain_is_stable(self):
        first = run("query", *DATA, "--query", "Q5", "--explain")[1]
        second = run("query", *DATA, "--query", "Q5", "--explain")[1]
        assert first == second
        assert first.index("backend:") < first.index("account_in_cycle\n")

    def test_query_file(self, tmp_path):
        path = tmp_path / "q.pgq"
        path.write_text("SELECT * FROM GRAPH_TABLE ( social_graph MATCH (p:Person) "
                        "WHERE p.city = 'Rome' RETURN (p.name) );")
        code, out, _ = run("query", *DATA, "--query-file", str(path), "--format", "csv")
        assert (code, out) == (EXIT_OK, "p_name\nEve\n")

    def test_env_depth_limit(self, monkeypatch):
        text = ("SELECT * FROM GRAPH_TABLE ( social_graph MATCH (x:Account) -[:Transfer]->* (y:Account) "
                "WHERE x.aid = 2 RETURN (y.aid) );")
        monkeypatch.setenv("PGQLITE_DEPTH_LIMIT", "1")
        assert run("query", *DATA, "--query", text, "--format", "csv")[1] == "y_aid\n3\n"
        # an explicit flag wins over the environment
        out = run("query", *DATA, "--query", text, "--format", "csv", "--depth-limit", "2")[1]
        assert out == "y_aid\n1\n3\n"

    def test_syntax_error(self):
        code, _, err = run("query", *DATA, "--query", "SELECT * FROM GRAPH_TABLE ( g MATCH (x )")
        assert code == EXIT_QUERY
        assert err.startswith("error:syntax:")
        assert "line 1, column" in err and len(err.splitlines()) == 1

    def test_unknown_label(self):
        code, _, err = run("query", *DATA, "--query",
                           "SELECT * FROM GRAPH_TABLE ( social_graph MATCH (x:Robot) RETURN (x.id) );")
        assert code == EXIT_QUERY and err.startswith("error:unknown-label:")


class TestOtherCommands:
    def test_load_ok(self):
        code, out, _ = run("load", *DATA)
        assert code == EXIT_OK
        assert out == "5 tables loaded, 0 FK violations\n"

    def test_load_reports_dangling_keys(self, tmp_path):
        data = tmp_path / "data"
        shutil.copytree(FIXTURE_DIR, data)
        with (data / "Transfer.csv").open("a") as fh:
            fh.write("7,1,99,5.0\n")
        code, out, err = run("load", "--data-dir", str(data))
        assert code == EXIT_DATA
        assert "1 FK violations" in out
        assert err.splitlines()[0] == "error:data:1 foreign-key violation(s)"
        assert "Transfer row 7" in err

    def test_missing_directory(self, tmp_path):
        code, _, err = run("load", "--data-dir", str(tmp_path / "nope"))
        assert code == EXIT_DATA and err.startswith("error:data:")

    def test_missing_csv(self, tmp_path):
        code, _, err = run("load", "--data-dir", str(tmp_path))
        assert code == EXIT_DATA and "missing input file" in err

    def test_ddl_round_trip(self, tmp_path):
        code, out, _ = run("ddl")
        assert code == EXIT_OK
        path = tmp_path / "again.ddl"
        path.write_text(out)
        assert run("ddl", "--ddl-file", str(path))[1] == out

    def test_transpile_recursive_only_when_unbounded(self):
        assert "RECURSIVE" in run("transpile", "--query", "Q4")[1]
        assert "RECURSIVE" not in run("transpile", "--query", "Q1")[1]

    def test_transpile_unsupported_construct(self):
        code, _, err = run("transpile", "--query", "SELECT * FROM GRAPH_TABLE ( social_graph MATCH "
                           "(x:Account) -[:Transfer]-* (y:Account) RETURN (y.aid) );")
        assert code == EXIT_QUERY
        assert err.startswith("error:unsupported:") and "undirected" in err

    def test_bench_row_counts_repeat(self, tmp_path):
        a = run("bench", "--sizes", "25", "--repetitions", "1", "--out-dir", str(tmp_path / "a"))
        b = run("bench", "--sizes", "25", "--repetitions", "1", "--out-dir", str(tmp_path / "b"))
        assert a[0] == b[0] == EXIT_OK
        assert (tmp_path / "a" / "rows.csv").read_text() == (tmp_path / "b" / "rows.csv").read_text()

    def test_bench_writes_reports(self, tmp_path):
        code, out, _ = run("bench", "--sizes", "20,30", "--repetitions", "1", "--out-dir", str(tmp_path))
        assert code == EXIT_OK
        assert "Q6" in out and "reports written to" in out
        assert (tmp_path / "ratio.csv").read_text().splitlines()[0] == "size,Q1,Q2,Q3,Q4,Q5,Q6"
        assert len((tmp_path / "creation.csv").read_text().strip().splitlines()) == 3

    @pytest.mark.parametrize("argv", [[], ["bench", "--sizes", ""], ["query", *DATA],
                                      ["bench", "--repetitions", "0"], ["frobnicate"]])
    def test_usage_errors(self, argv):
        code, _, err = run(*argv)
        assert code == EXIT_USAGE
        assert err.startswith("error:usage:")

    def test_console_script(self):
        proc = subprocess.run([sys.executable, "-m", "pgqlite.cli", "query", *DATA, "--query", "Q1"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert proc.stdout == Q1_TABLE
