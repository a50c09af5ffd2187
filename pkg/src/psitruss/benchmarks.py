"""Canonical single-axis benchmark problems (bars in a row).

These are the configurations with known closed-form behavior: a chain of
collinear bars under an end load, embedded in 2D with the transverse DOFs
pinned.  Every bar then carries the stress F/A and the solver's error decays
at the closed-form rate, independent of how many bars the chain has or how
their lengths compare.
"""

from __future__ import annotations

import numpy as np

from .materials import MaterialLaw
from .mesh import BoundaryConditions, TrussProblem


def serial_bars_problem(law: MaterialLaw, f_over_a: float, lengths=(1.0,),
                        area: float = 1.0,
                        solver_defaults: dict | None = None) -> TrussProblem:
    """Collinear chain of bars, left end fixed, axial end load F = f_over_a * area."""
    lengths = np.asarray(lengths, dtype=float)
    if lengths.ndim != 1 or lengths.size < 1 or np.any(lengths <= 0):
        raise ValueError("lengths must be positive scalars")
    xs = np.concatenate([[0.0], np.cumsum(lengths)])
    nodes = [(x, 0.0) for x in xs]
    n_nodes = len(nodes)
    conn = [(i, i + 1) for i in range(n_nodes - 1)]
    areas = [area] * len(conn)

    prescribed = [0, 1]  # left node pinned
    values = [0.0, 0.0]
    for i in range(1, n_nodes):
        prescribed.append(2 * i + 1)  # transverse DOFs pinned everywhere
        values.append(0.0)
    forces = np.zeros(2 * n_nodes)
    forces[2 * (n_nodes - 1)] = f_over_a * area

    bcs = BoundaryConditions(np.array(prescribed), np.array(values), forces)
    return TrussProblem(nodes, conn, areas, law, bcs,
                        solver_defaults=solver_defaults)


def single_bar_problem(law: MaterialLaw, f_over_a: float, length: float = 1.0,
                       area: float = 1.0,
                       solver_defaults: dict | None = None) -> TrussProblem:
    return serial_bars_problem(law, f_over_a, lengths=(length,), area=area,
                               solver_defaults=solver_defaults)


def unequal_lengths(n: int, ratio: float) -> np.ndarray:
    """n bar lengths grading geometrically from 1 up to ``ratio``."""
    if n == 1:
        return np.array([1.0])
    return np.geomspace(1.0, ratio, n)
