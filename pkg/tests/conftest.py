import pytest

_CRITERIA: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture
def criterion():
    """Record an acceptance verdict; the terminal summary prints one line each."""

    def record(number: int, name: str, passed: bool, detail: str = "") -> bool:
        _CRITERIA[number] = (name, bool(passed), detail)
        print(f"criterion {number} {'PASS' if passed else 'FAIL'}: {name} {detail}")
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        name, passed, detail = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number} {'PASS' if passed else 'FAIL'}: {name} {detail}")
