from __future__ import annotations

import pytest

_CRITERIA: list = []


class CriterionLog:
    def record(self, number: int, name: str, passed: bool, detail: str) -> None:
        line = f"criterion {number:>2} [{name}]: {'PASS' if passed else 'FAIL'} ({detail})"
        _CRITERIA.append((number, line))
        print(line)


@pytest.fixture(scope="session")
def criterion_log():
    return CriterionLog()


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_CRITERIA, key=lambda item: item[0]):
        terminalreporter.write_line(line)
