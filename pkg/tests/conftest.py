import pytest

_ACCEPTANCE_LINES = []


@pytest.fixture
def record_criterion():
    """Record a pass/fail line for the acceptance summary printed at the end of the run."""

    def record(number, title, passed, detail=""):
        _ACCEPTANCE_LINES.append((number, title, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(_ACCEPTANCE_LINES, key=lambda x: (x[0], x[1])):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {title}  {detail}")
