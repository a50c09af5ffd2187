"""Truss geometry, DOF bookkeeping, discrete gradient/divergence, and I/O.

A bar's compatibility row B_e maps nodal displacements to its axial strain
(entries -d_i/L at the first node, +d_i/L at the second, d the unit
direction).  Its transpose, weighted by the element volume, pushes a bar
stress back to nodal forces.  Everything downstream — both solvers and both
projections — is built from these two operators.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import FileFormatError, GeometryError, ShapeMismatchError
from .materials import LinearLaw, MaterialLaw, law_from_spec, law_to_spec


@dataclass(frozen=True)
class BarElement:
    """One bar with its derived geometric quantities."""

    node_a: int
    node_b: int
    area: float
    length: float
    volume: float
    direction: np.ndarray  # unit vector from node_a to node_b


@dataclass(frozen=True)
class BoundaryConditions:
    """Prescribed displacements and applied nodal forces.

    ``prescribed_dofs``/``prescribed_values`` list essential BCs by global
    DOF index; ``forces`` is the dense external force vector.  A DOF may not
    both carry a force and be prescribed.
    """

    prescribed_dofs: np.ndarray
    prescribed_values: np.ndarray
    forces: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "prescribed_dofs",
                           np.asarray(self.prescribed_dofs, dtype=int))
        object.__setattr__(self, "prescribed_values",
                           np.asarray(self.prescribed_values, dtype=float))
        object.__setattr__(self, "forces", np.asarray(self.forces, dtype=float))

    @property
    def n_dofs(self) -> int:
        return self.forces.size

    def free_dofs(self) -> np.ndarray:
        mask = np.ones(self.n_dofs, dtype=bool)
        mask[self.prescribed_dofs] = False
        return np.nonzero(mask)[0]

    def full_prescribed_vector(self) -> np.ndarray:
        """Displacement vector with prescribed values set and zeros elsewhere."""
        u = np.zeros(self.n_dofs)
        u[self.prescribed_dofs] = self.prescribed_values
        return u


class TrussProblem:
    """Immutable problem definition: geometry, law, BCs, solver defaults.

    ``nodes`` is (N_n, dim) with dim 2 or 3; ``connectivity`` is (N_e, 2);
    ``areas`` is (N_e,).  Validation happens on construction so that every
    downstream consumer can assume a well-posed problem.
    """

    def __init__(self, nodes, connectivity, areas, law: MaterialLaw,
                 bcs: BoundaryConditions, solver_defaults: dict | None = None,
                 material_spec: dict | None = None):
        nodes = np.array(nodes, dtype=float)
        conn = np.array(connectivity, dtype=int)
        areas = np.array(areas, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] not in (2, 3):
            raise ValueError(f"nodes must be (N, 2) or (N, 3), got {nodes.shape}")
        if not np.all(np.isfinite(nodes)):
            raise ValueError("node coordinates must be finite")
        if conn.ndim != 2 or conn.shape[1] != 2:
            raise ValueError(f"connectivity must be (N_e, 2), got {conn.shape}")
        if areas.shape != (conn.shape[0],):
            raise ShapeMismatchError(
                f"{areas.size} areas for {conn.shape[0]} elements")

        n_nodes = nodes.shape[0]
        for e, (a, b) in enumerate(conn):
            if not (0 <= a < n_nodes and 0 <= b < n_nodes):
                raise ValueError(
                    f"elements[{e}]: node index out of range ({a}, {b}) with "
                    f"{n_nodes} nodes")
            if a == b:
                raise GeometryError(f"elements[{e}]: bar connects node {a} to itself")
        if np.any(areas <= 0) or not np.all(np.isfinite(areas)):
            bad = int(np.argmin(areas))
            raise ValueError(f"elements[{bad}]: area must be finite and > 0")

        vec = nodes[conn[:, 1]] - nodes[conn[:, 0]]
        lengths = np.linalg.norm(vec, axis=1)
        if np.any(lengths <= 0.0):
            bad = int(np.argmin(lengths))
            raise GeometryError(f"elements[{bad}]: zero-length bar")

        if bcs.n_dofs != n_nodes * nodes.shape[1]:
            raise ShapeMismatchError(
                f"force vector length {bcs.n_dofs} != {n_nodes * nodes.shape[1]} DOFs")
        if bcs.prescribed_dofs.size:
            if bcs.prescribed_dofs.min() < 0 or bcs.prescribed_dofs.max() >= bcs.n_dofs:
                raise ValueError("prescribed DOF index out of range")
            if np.unique(bcs.prescribed_dofs).size != bcs.prescribed_dofs.size:
                raise ValueError("a DOF is prescribed more than once")
            if np.any(bcs.forces[bcs.prescribed_dofs] != 0.0):
                bad = bcs.prescribed_dofs[
                    np.nonzero(bcs.forces[bcs.prescribed_dofs])[0][0]]
                raise ValueError(
                    f"DOF {bad} is both prescribed and force-loaded")

        nodes.flags.writeable = False
        conn.flags.writeable = False
        areas.flags.writeable = False
        lengths.flags.writeable = False

        self.nodes = nodes
        self.connectivity = conn
        self.areas = areas
        self.lengths = lengths
        self.volumes = areas * lengths
        self.volumes.flags.writeable = False
        self.directions = vec / lengths[:, None]
        self.directions.flags.writeable = False
        self.law = law
        self.bcs = bcs
        self.solver_defaults = dict(solver_defaults or {})
        self.material_spec = material_spec

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.connectivity.shape[0]

    @property
    def n_dofs(self) -> int:
        return self.n_nodes * self.dim

    def element(self, e: int) -> BarElement:
        a, b = self.connectivity[e]
        return BarElement(int(a), int(b), float(self.areas[e]),
                          float(self.lengths[e]), float(self.volumes[e]),
                          self.directions[e].copy())

    def dof(self, node: int, component: int) -> int:
        return node * self.dim + component


def build_b(element: BarElement, n_dofs: int, dim: int) -> sp.csr_matrix:
    """Compatibility row of one bar: a sparse 1 x N_dofs matrix.

    ``(build_b(e) @ u)[0]`` is the small-strain axial strain of the bar under
    nodal displacements ``u``; any rigid translation maps to zero.
    """
    if element.length <= 0:
        raise GeometryError("zero-length bar has no strain operator")
    cols = np.concatenate([
        element.node_a * dim + np.arange(dim),
        element.node_b * dim + np.arange(dim),
    ])
    vals = np.concatenate([-element.direction, element.direction]) / element.length
    return sp.csr_matrix((vals, (np.zeros(2 * dim, dtype=int), cols)),
                         shape=(1, n_dofs))


def build_b_matrix(problem: TrussProblem) -> sp.csr_matrix:
    """Stacked compatibility rows of all bars: (N_e x N_dofs), CSR."""
    dim = problem.dim
    n_e = problem.n_elements
    rows = np.repeat(np.arange(n_e), 2 * dim)
    cols = np.empty((n_e, 2 * dim), dtype=int)
    cols[:, :dim] = problem.connectivity[:, 0:1] * dim + np.arange(dim)
    cols[:, dim:] = problem.connectivity[:, 1:2] * dim + np.arange(dim)
    vals = np.hstack([-problem.directions, problem.directions])
    vals = vals / problem.lengths[:, None]
    return sp.csr_matrix((vals.ravel(), (rows, cols.ravel())),
                         shape=(n_e, problem.n_dofs))


def assemble_internal_force(problem: TrussProblem, stresses,
                            b_matrix: sp.csr_matrix | None = None) -> np.ndarray:
    """Nodal internal forces sum_e w_e B_e^T sigma_e."""
    stresses = np.asarray(stresses, dtype=float)
    if stresses.shape != (problem.n_elements,):
        raise ShapeMismatchError(
            f"{stresses.size} stresses for {problem.n_elements} elements")
    b = build_b_matrix(problem) if b_matrix is None else b_matrix
    return b.T @ (problem.volumes * stresses)


# ---------------------------------------------------------------------------
# Problem file I/O
# ---------------------------------------------------------------------------

def _validated(raw, key, kind, path, location=""):
    if key not in raw:
        raise FileFormatError(f"missing required key {key!r}", path=path,
                              location=location or None)
    value = raw[key]
    if not isinstance(value, kind):
        raise FileFormatError(
            f"{key} must be {getattr(kind, '__name__', kind)}", path=path,
            location=location or None)
    return value


def load_problem(path) -> TrussProblem:
    """Read a problem file (JSON), validating every field with a positioned
    error message.  See the package README for the file layout."""
    path = str(path)
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FileFormatError(f"cannot read problem file: {exc}", path=path) from exc
    if not isinstance(raw, dict):
        raise FileFormatError("top level must be an object", path=path)

    nodes = _validated(raw, "nodes", list, path)
    elements = _validated(raw, "elements", list, path)
    material = _validated(raw, "material", dict, path)
    bcs_raw = _validated(raw, "bcs", list, path)
    forces_raw = _validated(raw, "forces", list, path)
    solver = raw.get("solver", {})
    if not isinstance(solver, dict):
        raise FileFormatError("solver must be an object", path=path)

    try:
        nodes_arr = np.array(nodes, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FileFormatError(f"nodes must be numeric: {exc}", path=path,
                              location="nodes") from exc
    if nodes_arr.ndim != 2 or nodes_arr.shape[1] not in (2, 3):
        raise FileFormatError(
            f"nodes must be rows of 2 or 3 coordinates, got shape {nodes_arr.shape}",
            path=path, location="nodes")
    dim = nodes_arr.shape[1]
    n_nodes = nodes_arr.shape[0]

    conn, areas = [], []
    for i, row in enumerate(elements):
        loc = f"elements[{i}]"
        if (not isinstance(row, list)) or len(row) != 3:
            raise FileFormatError("element rows are [node_a, node_b, area]",
                                  path=path, location=loc)
        a, b, area = row
        if not (isinstance(a, int) and isinstance(b, int)):
            raise FileFormatError("node indices must be integers", path=path,
                                  location=loc)
        if not (0 <= a < n_nodes and 0 <= b < n_nodes):
            raise FileFormatError(
                f"node index out of range ({a}, {b}) with {n_nodes} nodes",
                path=path, location=loc)
        conn.append((a, b))
        areas.append(float(area))

    forces = np.zeros(n_nodes * dim)
    for i, entry in enumerate(forces_raw):
        loc = f"forces[{i}]"
        node, comp, value = _bc_entry(entry, n_nodes, dim, path, loc)
        forces[node * dim + comp] += value

    pres_dofs, pres_vals = [], []
    for i, entry in enumerate(bcs_raw):
        loc = f"bcs[{i}]"
        node, comp, value = _bc_entry(entry, n_nodes, dim, path, loc)
        pres_dofs.append(node * dim + comp)
        pres_vals.append(value)

    law = law_from_spec(material, base_dir=Path(path).parent)

    try:
        bcs = BoundaryConditions(np.array(pres_dofs, dtype=int),
                                 np.array(pres_vals), forces)
        problem = TrussProblem(nodes_arr, conn, areas, law, bcs,
                               solver_defaults=solver, material_spec=material)
    except (ValueError, GeometryError, ShapeMismatchError) as exc:
        raise FileFormatError(str(exc), path=path) from exc

    # Fail fast on floating structures: the condensed stiffness must be SPD.
    from .equilibrium import assemble_k  # local import to avoid a cycle
    assemble_k(problem, 1.0)
    return problem


def _bc_entry(entry, n_nodes, dim, path, loc):
    if not isinstance(entry, dict):
        raise FileFormatError("entries are objects with node/dof/value",
                              path=path, location=loc)
    for key in ("node", "dof", "value"):
        if key not in entry:
            raise FileFormatError(f"missing {key!r}", path=path, location=loc)
    node, comp, value = entry["node"], entry["dof"], entry["value"]
    if not isinstance(node, int) or not (0 <= node < n_nodes):
        raise FileFormatError(f"node {node} out of range ({n_nodes} nodes)",
                              path=path, location=loc)
    if not isinstance(comp, int) or not (0 <= comp < dim):
        raise FileFormatError(f"dof {comp} out of range for dim {dim}",
                              path=path, location=loc)
    if not isinstance(value, (int, float)):
        raise FileFormatError("value must be a number", path=path, location=loc)
    return node, comp, float(value)


def problem_to_dict(problem: TrussProblem) -> dict:
    material = problem.material_spec or law_to_spec(problem.law)
    bcs = [
        {"node": int(d // problem.dim), "dof": int(d % problem.dim), "value": float(v)}
        for d, v in zip(problem.bcs.prescribed_dofs, problem.bcs.prescribed_values)
    ]
    forces = [
        {"node": int(d // problem.dim), "dof": int(d % problem.dim), "value": float(f)}
        for d, f in enumerate(problem.bcs.forces) if f != 0.0
    ]
    return {
        "nodes": [[float(x) for x in row] for row in problem.nodes],
        "elements": [[int(a), int(b), float(area)] for (a, b), area
                     in zip(problem.connectivity, problem.areas)],
        "material": material,
        "bcs": bcs,
        "forces": forces,
        "solver": problem.solver_defaults,
    }


def save_problem(path, problem: TrussProblem):
    Path(path).write_text(json.dumps(problem_to_dict(problem), indent=1,
                                     sort_keys=True) + "\n")


def save_results(path, solution):
    """Write a solution file (JSON).  Deterministic for identical solutions:
    timings never enter, keys are sorted, floats use shortest round-trip."""
    Path(path).write_text(json.dumps(solution.to_dict(), indent=1,
                                     sort_keys=True) + "\n")


def load_results(path) -> dict:
    path = str(path)
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FileFormatError(f"cannot read results file: {exc}", path=path) from exc
    if not isinstance(raw, dict) or "displacements" not in raw:
        raise FileFormatError("not a results file", path=path)
    return raw


# ---------------------------------------------------------------------------
# Test-truss generator
# ---------------------------------------------------------------------------

def generate_truss(rows: int, cols: int, spacing: float = 1.0,
                   area: float = 1e-4, law: MaterialLaw | None = None,
                   load: float = -1000.0, settle: float = 0.0,
                   solver_defaults: dict | None = None,
                   material_spec: dict | None = None) -> TrussProblem:
    """Rectangular X-braced planar test truss.

    Nodes sit on a (cols+1) x (rows+1) grid with the given spacing, numbered
    column-major bottom-to-top.  Bars: all horizontal and vertical grid edges
    plus both diagonals of every cell, so

        N_n = (rows + 1) * (cols + 1)
        N_e = cols * (rows + 1) + rows * (cols + 1) + 2 * rows * cols

    Supports: the bottom-left node is pinned, the bottom-right node is a
    vertical roller.  Loading: a vertical force ``load`` at every interior
    top-chord node; if ``settle`` is nonzero, the two central top-chord nodes
    instead settle downward by that amount (essential BC).  Deterministic:
    identical inputs produce identical problems.
    """
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be >= 1")
    if spacing <= 0 or area <= 0:
        raise ValueError("spacing and area must be > 0")
    law = law if law is not None else LinearLaw(y=1.0)

    n_x, n_y = cols + 1, rows + 1
    nodes = [(i * spacing, j * spacing) for i in range(n_x) for j in range(n_y)]

    def nid(i, j):
        return i * n_y + j

    conn, areas = [], []

    def bar(a, b):
        conn.append((a, b))
        areas.append(area)

    for j in range(n_y):
        for i in range(cols):
            bar(nid(i, j), nid(i + 1, j))
    for i in range(n_x):
        for j in range(rows):
            bar(nid(i, j), nid(i, j + 1))
    for i in range(cols):
        for j in range(rows):
            bar(nid(i, j), nid(i + 1, j + 1))
            bar(nid(i + 1, j), nid(i, j + 1))

    n_dofs = 2 * n_x * n_y
    forces = np.zeros(n_dofs)
    pres, vals = [], []
    for comp in (0, 1):
        pres.append(2 * nid(0, 0) + comp)
        vals.append(0.0)
    pres.append(2 * nid(cols, 0) + 1)
    vals.append(0.0)

    settle_nodes = set()
    if settle != 0.0:
        mid = cols // 2
        settle_nodes = {nid(mid, rows), nid(min(mid + 1, cols), rows)}
        for n in sorted(settle_nodes):
            pres.append(2 * n + 1)
            vals.append(-abs(settle))
    for i in range(1, cols):
        n = nid(i, rows)
        if n not in settle_nodes:
            forces[2 * n + 1] += load

    bcs = BoundaryConditions(np.array(pres, dtype=int), np.array(vals), forces)
    return TrussProblem(nodes, conn, areas, law, bcs,
                        solver_defaults=solver_defaults,
                        material_spec=material_spec)
