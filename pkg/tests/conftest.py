import pytest

_CRITERIA: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line for an acceptance criterion; lines are echoed in the terminal summary."""

    def record(label: str, passed: bool, detail: str) -> bool:
        line = f"{'PASS' if passed else 'FAIL'}  {label}: {detail}"
        _CRITERIA.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
