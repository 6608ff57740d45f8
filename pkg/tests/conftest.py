from __future__ import annotations

import pytest

from searchgame.core import validate_instance


@pytest.fixture
def ex1():
    """Two boxes with (1 - q2) = (1 - q1)^2, the standard cyclic fixture."""
    return validate_instance([(0.4, 1.0), (0.64, 0.6)], [2, 1])


@pytest.fixture
def sym2():
    return validate_instance([(0.5, 1.0), (0.5, 1.0)], [1, 1])


@pytest.fixture
def sym2_plain():
    return validate_instance([(0.5, 1.0), (0.5, 1.0)])


@pytest.fixture
def ruckle():
    return validate_instance([(0.5, 1.0), (1.0, 1.0)])


@pytest.fixture
def single():
    return validate_instance([(0.5, 1.0)], [1])


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_log():
    """Collects one PASS/FAIL line per acceptance criterion for the summary."""

    def record(line: str) -> None:
        print(line)
        _ACCEPTANCE_LINES.append(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
