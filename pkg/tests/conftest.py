import os
import sys

import pytest

ACCEPTANCE_LINES: list[str] = []

os.environ.setdefault("ORBITLAB_THREADS", "2")


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


sys.dont_write_bytecode = True
