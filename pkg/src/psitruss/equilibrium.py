"""Projection onto the equilibrium-compatible set.

The constant stiffness K = sum_e w_e B_e^T C B_e is assembled and factorized
once per solve and then reused for both linear systems of every iteration:
the imbalance solve (K eta = F_ext - F_int) and the displacement solve
(K u = sum_e w_e B_e^T C eps'_e), both condensed over the free DOFs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import ModelingError, ShapeMismatchError
from .mesh import TrussProblem, build_b_matrix
from .phase_space import PhasePoint

# Relative pivot cutoff below which the condensed stiffness is declared
# numerically singular (rigid-body modes survived the boundary conditions).
_SPD_PIVOT_RTOL = 1e-12


def assemble_stiffness(b_matrix: sp.csr_matrix, volumes: np.ndarray,
                       moduli) -> sp.csr_matrix:
    """sum_e w_e * m_e * B_e^T B_e for per-element scalars ``moduli``."""
    scaled = b_matrix.multiply((volumes * moduli)[:, None]).tocsr()
    return (b_matrix.T @ scaled).tocsr()


@dataclass
class StiffnessFactorization:
    """Factorized condensed stiffness plus the DOF bookkeeping around it.

    Built exactly once per solve; every field is treated as read-only.
    """

    problem: TrussProblem
    c: float
    b_matrix: sp.csr_matrix
    k: sp.csr_matrix
    free: np.ndarray
    prescribed: np.ndarray
    prescribed_values: np.ndarray
    k_fp: sp.csr_matrix
    _lu: object

    def solve_free(self, rhs_free: np.ndarray) -> np.ndarray:
        return self._lu.solve(rhs_free)


def assemble_k(problem: TrussProblem, c: float) -> StiffnessFactorization:
    """Assemble K with distance constant ``c`` and factorize its condensed
    block.  With ``c`` equal to the zero-strain modulus this is the tangent
    stiffness at the origin.

    Raises :class:`ModelingError` when the condensed block is not SPD, which
    means the boundary conditions leave rigid-body modes.
    """
    if c <= 0:
        raise ValueError(f"distance constant must be > 0, got {c}")
    b = build_b_matrix(problem)
    k = assemble_stiffness(b, problem.volumes, c)
    free = problem.bcs.free_dofs()
    prescribed = problem.bcs.prescribed_dofs
    k_ff = k[free][:, free].tocsc()
    k_fp = k[free][:, prescribed].tocsr()
    if free.size == 0:
        raise ModelingError("no free DOFs: the whole structure is prescribed")
    try:
        lu = splu(k_ff, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                  options=dict(SymmetricMode=True))
    except RuntimeError as exc:
        raise ModelingError(
            f"condensed stiffness is singular ({exc}); the boundary "
            "conditions do not suppress all rigid-body modes") from exc
    pivots = lu.U.diagonal()
    if np.any(pivots <= _SPD_PIVOT_RTOL * pivots.max()):
        raise ModelingError(
            "condensed stiffness is not positive definite; the boundary "
            "conditions do not suppress all rigid-body modes")
    return StiffnessFactorization(problem=problem, c=c, b_matrix=b, k=k,
                                  free=free, prescribed=prescribed,
                                  prescribed_values=problem.bcs.prescribed_values,
                                  k_fp=k_fp, _lu=lu)


def internal_force(fact: StiffnessFactorization, stresses: np.ndarray) -> np.ndarray:
    return fact.b_matrix.T @ (fact.problem.volumes * stresses)


def solve_eta(fact: StiffnessFactorization, stresses: np.ndarray) -> np.ndarray:
    """Imbalance multipliers: K eta = F_ext - F_int(sigma') on free DOFs,
    zero at prescribed DOFs."""
    stresses = np.asarray(stresses, dtype=float)
    if stresses.shape != (fact.problem.n_elements,):
        raise ShapeMismatchError(
            f"{stresses.size} stresses for {fact.problem.n_elements} elements")
    residual = fact.problem.bcs.forces - internal_force(fact, stresses)
    eta = np.zeros(fact.problem.n_dofs)
    eta[fact.free] = fact.solve_free(residual[fact.free])
    return eta


def update_stress(fact: StiffnessFactorization, stresses: np.ndarray,
                  eta: np.ndarray) -> np.ndarray:
    """Equilibrated stresses sigma_e = sigma'_e + C * B_e eta."""
    return np.asarray(stresses, dtype=float) + fact.c * (fact.b_matrix @ eta)


def solve_u(fact: StiffnessFactorization, strains: np.ndarray) -> np.ndarray:
    """Displacements from K u = sum_e w_e B_e^T C eps'_e with essential BCs
    condensed: prescribed entries are substituted and moved to the RHS."""
    strains = np.asarray(strains, dtype=float)
    if strains.shape != (fact.problem.n_elements,):
        raise ShapeMismatchError(
            f"{strains.size} strains for {fact.problem.n_elements} elements")
    rhs = fact.b_matrix.T @ (fact.problem.volumes * fact.c * strains)
    u = np.zeros(fact.problem.n_dofs)
    u[fact.prescribed] = fact.prescribed_values
    u[fact.free] = fact.solve_free(rhs[fact.free] - fact.k_fp @ fact.prescribed_values)
    return u


def project_e(z: PhasePoint, fact: StiffnessFactorization):
    """Closest equilibrated-compatible point to ``z``.

    Returns ``(point, u, eta)``: strains are recomputed as B u so that
    compatibility holds exactly, stresses get the C B eta correction so that
    the free-DOF force balance holds to solver precision.
    """
    if z.n_elements != fact.problem.n_elements:
        raise ShapeMismatchError(
            f"point has {z.n_elements} elements, problem has "
            f"{fact.problem.n_elements}")
    eta = solve_eta(fact, z.stress)
    sigma = update_stress(fact, z.stress, eta)
    u = solve_u(fact, z.strain)
    eps = fact.b_matrix @ u
    return PhasePoint(eps, sigma), u, eta


def reactions(fact: StiffnessFactorization, stresses: np.ndarray) -> np.ndarray:
    """Support reactions F_int - F_ext at the prescribed DOFs."""
    imbalance = internal_force(fact, stresses) - fact.problem.bcs.forces
    return imbalance[fact.prescribed]
