import time

import pytest

from bunched.search import decide
from bunched.syntax import parse_sequent

from corpus import PROVABLE, UNPROVABLE

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def corpus_results():
    """Every corpus sequent decided once with default settings: text -> (result, seconds)."""
    out = {}
    for text in PROVABLE + UNPROVABLE:
        t0 = time.perf_counter()
        res = decide(parse_sequent(text))
        out[text] = (res, time.perf_counter() - t0)
    return out


@pytest.fixture
def acceptance_report():
    def record(n: int, ok: bool, detail: str):
        ACCEPTANCE_LINES.append(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
