from __future__ import annotations

import sys
from pathlib import Path

import pytest

from acmtrace.dsl import parse, parse_file
from acmtrace.metamodel import build_graph

FIXTURES = Path(__file__).parent / "fixtures"
FIX1 = FIXTURES / "fix1.acm"
FIX2 = FIXTURES / "fix2.acm"

sys.path.insert(0, str(Path(__file__).parent))


def graph_of(text: str, file_name: str = "<test>"):
    result = parse(text, file_name)
    assert result.diagnostics == []
    return build_graph(result.artifacts, result.links)


@pytest.fixture(scope="session")
def fix1_text() -> str:
    return FIX1.read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def fix1():
    result = parse_file(FIX1)
    return build_graph(result.artifacts, result.links)


@pytest.fixture(scope="session")
def fix2():
    result = parse_file(FIX2)
    return build_graph(result.artifacts, result.links)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module and module.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in module.RESULTS:
            terminalreporter.write_line(line)
