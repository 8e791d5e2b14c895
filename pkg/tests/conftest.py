import pytest

from bathtub_repair import BATHTUB_EXAMPLE

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def example():
    return BATHTUB_EXAMPLE


@pytest.fixture
def report():
    def _report(label: str, ok: bool, detail: str = "") -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] {label}" + (f" -- {detail}" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
