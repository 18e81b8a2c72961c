from __future__ import annotations

import sys

import pytest

from airy.gravity import CorrelatorSolver, compute_correlators, free_energy
from airy.series import Window


def pytest_terminal_summary(terminalreporter):
    lines = [line for name, mod in list(sys.modules.items())
             if name.endswith("test_acceptance") for line in getattr(mod, "LINES", [])]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def solver():
    return CorrelatorSolver()


@pytest.fixture(scope="session")
def table_662(solver):
    return compute_correlators(Window(6, 6, 2), solver=solver)


@pytest.fixture(scope="session")
def energy_t(table_662):
    return free_energy(table_662, "t")


@pytest.fixture(scope="session")
def energy_u(table_662):
    return free_energy(table_662, "u")
