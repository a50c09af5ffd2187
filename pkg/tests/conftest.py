import numpy as np
import pytest

from psitruss import (BoundaryConditions, LinearLaw, PowerLaw, TrussProblem,
                      generate_truss, single_bar_problem)

DATA_DIR = __import__("pathlib").Path(__file__).parent / "data"

# PASS/FAIL lines appended by the acceptance tests, echoed after the run.
acceptance_lines = []


def pytest_terminal_summary(terminalreporter):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture
def one_bar_problem():
    """Horizontal unit bar under unit axial stress (F/A = 1)."""
    return single_bar_problem(LinearLaw(y=1.0), f_over_a=1.0)


@pytest.fixture
def triangle_problem():
    """Three-bar triangle, 6 DOFs, statically determinate supports."""
    nodes = [(0.0, 0.0), (1.0, 0.0), (0.5, 0.8)]
    conn = [(0, 1), (1, 2), (2, 0)]
    areas = [2e-4] * 3
    forces = np.zeros(6)
    forces[2 * 2 + 1] = -500.0
    bcs = BoundaryConditions([0, 1, 3], [0.0, 0.0, 0.0], forces)
    return TrussProblem(nodes, conn, areas, LinearLaw(y=1e9), bcs)


@pytest.fixture
def braced_quad_problem():
    """X-braced unit square, 8 DOFs: largest case the dense oracle covers."""
    nodes = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    conn = [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3)]
    areas = [1e-4] * 6
    forces = np.zeros(8)
    forces[2 * 2] = 800.0
    forces[2 * 2 + 1] = -300.0
    bcs = BoundaryConditions([0, 1, 2 * 1 + 1], [0.0] * 3, forces)
    return TrussProblem(nodes, conn, areas, LinearLaw(y=5e8), bcs)


def desk_truss(law=None, load=-1500.0, rows=3, cols=8, settle=0.0):
    """~100-bar nonlinear test structure shared by solver-level tests."""
    law = law or PowerLaw(y0=2e11, p=1e-4)
    return generate_truss(rows, cols, spacing=1.0, area=1e-4, law=law,
                          load=load, settle=settle)


@pytest.fixture
def power_desk_truss():
    return desk_truss()
