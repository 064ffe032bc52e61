import pytest

from ectwists.curve import CurveData, an_table, get_curve

LABELS = ("11a1", "14a1", "15a1")


@pytest.fixture(scope="session")
def e11():
    return get_curve("11a1")


@pytest.fixture(scope="session")
def curves():
    return {label: get_curve(label) for label in LABELS}


@pytest.fixture(scope="session")
def e37():
    # rank one, root number -1; not in the shipped catalogue
    return CurveData("37a1", 0, 0, 1, -1, 0, conductor=37)


@pytest.fixture(scope="session")
def table11(e11):
    return an_table(e11, 200_000)


ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def report():
    """report(n, ok, detail) records one acceptance line and returns ok."""

    def _report(n: int, ok: bool, detail: str) -> bool:
        ACCEPTANCE_LINES[n] = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
