import pytest

from phaseprop.propagator import Grid
from phaseprop.wavefield import DoubleSlitWave

# lines recorded by test_acceptance.py, echoed once at the end of the run
ACCEPTANCE_LINES: dict[int, str] = {}


def record_acceptance(number: int, passed: bool, text: str) -> None:
    ACCEPTANCE_LINES[number] = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {text}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])


@pytest.fixture(scope="session")
def wave():
    return DoubleSlitWave(500e-9, 100e-9)


@pytest.fixture(scope="session")
def coarse_grid():
    return Grid.symmetric(10e-6, 2048)
