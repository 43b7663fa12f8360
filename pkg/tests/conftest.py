import pytest

_LINES: list[str] = []


@pytest.fixture
def record():
    """Collect one ``CRITERION n: PASS|FAIL ...`` line per acceptance criterion."""

    def add(number: int, ok: bool, detail: str) -> None:
        _LINES.append(f"CRITERION {number}: {'PASS' if ok else 'FAIL'}  {detail}")

    return add


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
