import pytest

from brwgibbs import BrwInstance, IncrementModel

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def gaussian2():
    return IncrementModel.gaussian(2)


@pytest.fixture
def report():
    """Record one pass/fail line per acceptance criterion."""

    def _report(criterion, ok, detail=""):
        line = f"[acceptance {criterion:>2}] {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _report


def make_instance(model, N, seed, **kw):
    return BrwInstance(model, N, seed, **kw)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
