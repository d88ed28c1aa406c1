import pytest

_RESULTS = []


@pytest.fixture
def record():
    """Store ``(name, ok, detail)`` for the acceptance summary printed at the end of the run."""

    def _record(name, ok, detail):
        _RESULTS.append((name, bool(ok), detail))

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
