from __future__ import annotations

import sys
from collections import Counter
from pathlib import Path

import pytest

HERE = Path(__file__).parent
sys.path.insert(0, str(HERE))

FIXTURE_DIR = HERE / "fixtures" / "social"
GOLDEN_DIR = HERE / "golden"


def golden(name: str) -> str:
    return (GOLDEN_DIR / name).read_text(encoding="utf-8")


def multiset(rows) -> Counter:
    return Counter(tuple(r) for r in rows)


@pytest.fixture(scope="session")
def fixture_session():
    from pgqlite.session import open_session

    return open_session(FIXTURE_DIR)


@pytest.fixture()
def fresh_fixture_session():
    from pgqlite.session import open_session

    return open_session(FIXTURE_DIR)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for tag in sorted(lines):
        terminalreporter.write_line(lines[tag])
