import numpy as np
import pytest

from sephier.grid import Grid, GridState


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            lines += [(key, value) for key, value in getattr(rep, "user_properties", ()) if key[0] == "acceptance"]
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)


@pytest.fixture
def grid():
    return Grid(2 * np.pi, 64)


@pytest.fixture
def small_grid():
    return Grid(2 * np.pi, 8)


@pytest.fixture
def probe_pair(grid):
    phi = GridState.from_function(grid, lambda x: 1 + 0.3 * np.exp(2j * x)).normalized()
    psi = GridState.from_function(grid, lambda x: 1 + 0.3 * np.exp(-2j * x)).normalized()
    return phi, psi
