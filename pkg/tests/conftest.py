import pytest

_RESULTS = {}


@pytest.fixture
def record_criterion():
    """Store ``(ok, detail)`` for an acceptance criterion number."""

    def record(number, ok, detail):
        _RESULTS[number] = (bool(ok), detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        ok, detail = _RESULTS[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
