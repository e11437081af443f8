import pytest

from spinorbit import UP_X, UP_Z, gaussian_wavepacket, make_grid


@pytest.fixture(scope="session")
def grid():
    return make_grid(128, 128, 8.0)


@pytest.fixture(scope="session")
def fine_grid():
    return make_grid(256, 256, 8.0)


@pytest.fixture
def up(grid):
    return gaussian_wavepacket(grid, spin=UP_Z)


@pytest.fixture
def plus_x(grid):
    return gaussian_wavepacket(grid, spin=UP_X)


def pytest_terminal_summary(terminalreporter):
    # one line per acceptance criterion that ran, passing or not
    import sys

    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(module, "_results", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for ident in sorted(results):
        terminalreporter.write_line(results[ident].line())
