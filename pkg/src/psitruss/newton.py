"""Damped Newton-Raphson baseline for cross-checking the projection solver.

The iteration matrix blends the current tangent stiffness with the
zero-strain stiffness, gamma * K_T(u) + (1 - gamma) * K_0, which keeps the
updates sane when imposed displacements are applied in full at the first
iteration (they are, matching the projection solver's initialization).
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import ModelingError
from .equilibrium import assemble_stiffness
from .materials import MaterialLaw
from .mesh import TrussProblem, build_b_matrix
from .solver import (IterationTrace, Solution, STOP_FORCE, STOP_MAXITER,
                     residual_reference)


@dataclass(frozen=True)
class NrConfig:
    """Damping factor in (0, 1], relative residual tolerance, iteration cap."""

    gamma: float = 0.8
    tol: float = 5e-2
    max_iter: int = 200

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"damping must lie in (0, 1], got {self.gamma}")
        if self.tol <= 0 or self.max_iter < 1:
            raise ValueError("tolerance and iteration cap must be positive")


def assemble_tangent(problem: TrussProblem, law: MaterialLaw, u: np.ndarray,
                     b_matrix: sp.csr_matrix | None = None) -> sp.csr_matrix:
    """Tangent stiffness sum_e w_e * m'(B_e u) * B_e^T B_e (symmetric)."""
    b = build_b_matrix(problem) if b_matrix is None else b_matrix
    strains = b @ np.asarray(u, dtype=float)
    moduli = np.asarray(law.tangent(strains), dtype=float)
    return assemble_stiffness(b, problem.volumes, moduli)


def nr_solve(problem: TrussProblem, config: NrConfig | None = None) -> Solution:
    """Damped Newton-Raphson iteration on the force residual.

    Imposed displacements are substituted fully before the first iteration;
    each step solves (gamma K_T + (1 - gamma) K_0) du = F_ext - F_int on the
    free DOFs and the tangent is rebuilt from scratch every time.  The
    residual is measured against ||F_ext|| on the free DOFs, falling back to
    the absolute scale Y0 * mean(area) under pure displacement loading.

    The shared trace layout is reused with NR semantics: ``ps_step_rel``
    holds the relative displacement step, ``t_pe_ms`` the linear-solve time
    and ``t_pd_ms`` the assembly/constitutive time of the iteration.
    """
    config = config or NrConfig()
    law = problem.law
    y0 = law.zero_strain_modulus()
    b = build_b_matrix(problem)
    k0 = assemble_stiffness(b, problem.volumes, y0)
    free = problem.bcs.free_dofs()
    prescribed = problem.bcs.prescribed_dofs
    f_ext = problem.bcs.forces
    ref = residual_reference(problem, y0)

    def int_force(disp):
        return b.T @ (problem.volumes * np.asarray(law.stress(b @ disp), dtype=float))

    u = problem.bcs.full_prescribed_vector()
    trace = IterationTrace()
    stop = STOP_MAXITER
    f_int = int_force(u)
    residual_rel = float(np.linalg.norm((f_ext - f_int)[free])) / ref
    if residual_rel < config.tol:
        stop = STOP_FORCE
    else:
        for _ in range(config.max_iter):
            t0 = time.perf_counter()
            k_t = assemble_tangent(problem, law, u, b_matrix=b)
            blended = (config.gamma * k_t + (1.0 - config.gamma) * k0)
            t1 = time.perf_counter()
            try:
                lu = splu(blended[free][:, free].tocsc(),
                          permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                          options=dict(SymmetricMode=True))
            except RuntimeError as exc:
                raise ModelingError(
                    f"blended iteration matrix is singular: {exc}") from exc
            du = lu.solve((f_ext - f_int)[free])
            u_norm = np.linalg.norm(u)
            step_rel = (float(np.linalg.norm(du)) / u_norm if u_norm > 0.0
                        else np.inf)
            u = u.copy()
            u[free] += du
            t2 = time.perf_counter()
            f_int = int_force(u)
            residual_rel = float(np.linalg.norm((f_ext - f_int)[free])) / ref
            trace.append(residual_rel, step_rel, (t2 - t1) * 1e3, (t1 - t0) * 1e3)
            if residual_rel < config.tol:
                stop = STOP_FORCE
                break

    trace.stop_reason = stop
    strains = b @ u
    stresses = np.asarray(law.stress(strains), dtype=float)
    imbalance = f_int - f_ext
    return Solution(
        solver="nr",
        u=u,
        strains=strains,
        stresses=stresses,
        reaction_dofs=prescribed.copy(),
        reaction_values=imbalance[prescribed],
        trace=trace,
        stop_reason=stop,
        iterations=len(trace),
        residual_rel=residual_rel,
        converged=stop == STOP_FORCE,
    )
