import pytest

from rigidlab.cf_arith import Irrational


@pytest.fixture
def golden():
    return Irrational.golden()


@pytest.fixture
def sqrt2():
    return Irrational.sqrt2()


def pytest_terminal_summary(terminalreporter):
    import _acceptance

    if _acceptance.LINES:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance.LINES:
            terminalreporter.write_line(line)
