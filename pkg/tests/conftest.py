import pytest

_criteria = []


@pytest.fixture
def record():
    """Log one acceptance line; the collected lines are echoed in the terminal summary."""

    def _record(number, title, passed, detail=""):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d}  {title}: {detail}"
        _criteria.append((number, line))
        print(line)
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_criteria):
        terminalreporter.write_line(line)
