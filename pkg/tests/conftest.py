from __future__ import annotations

import pytest

from phi4flow.flow_solver import FlowSolver, SolverConfig


@pytest.fixture(scope="session")
def solver():
    """Default solver (Lam0 = 100 m) integrated through l = 2."""
    return FlowSolver(SolverConfig(l_max=2)).solve()


@pytest.fixture(scope="session")
def wide_solver():
    """Lam0 = 1e4 m with the four-point grid extended to |p| = 80 m."""
    return FlowSolver(SolverConfig(lam0=1e4, p_max=80.0, l_max=1)).solve()


_VERDICTS: list[str] = []


def pytest_runtest_logreport(report):
    if report.when == "call":
        _VERDICTS.extend(line for line in report.capstdout.splitlines() if line.startswith("ACCEPTANCE "))


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_VERDICTS):
            terminalreporter.write_line(line)
