import os
import tempfile

import pytest

# keep catalog builds out of the user's cache; one build per session
_CACHE = tempfile.mkdtemp(prefix="ceef-test-cache-")
os.environ.setdefault("CEEF_CACHE", _CACHE)

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def formulas():
    from ceef.formula import build_formula

    store = {}

    def get(m):
        if m not in store:
            store[m] = build_formula(m)
        return store[m]

    return get


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
