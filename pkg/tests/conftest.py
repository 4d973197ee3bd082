import sys

import pytest

from eighthmoment.arith import build_tables


@pytest.fixture(scope="session")
def small_tables():
    return build_tables(5000, ks=(2, 3, 4))


@pytest.fixture(scope="session")
def divisor_tables():
    # covers 2X + r for X = 1e5 and the q-sums of the truncated main term
    return build_tables(200_020, ks=(2, 3, 4))


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULT_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
