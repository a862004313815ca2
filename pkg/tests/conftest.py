import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_LINES = []


@pytest.fixture
def acceptance():
    """Record a one-line verdict that is echoed in the terminal summary."""

    def report(number, ok, detail):
        _LINES.append((number, f"acceptance {number}: {'PASS' if ok else 'FAIL'}  {detail}"))
        print(_LINES[-1][1])
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_LINES):
            terminalreporter.write_line(line)
