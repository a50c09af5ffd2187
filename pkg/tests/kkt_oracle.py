"""Dense equality-constrained least-distance oracle for the equilibrium
projection.

Re-derives the projection from scratch: minimize the weighted phase-space
distance subject to the free-DOF force balance and strain compatibility,
assembled as one dense KKT system plus one dense normal-equation solve.
Deliberately shares nothing with the library's solve path beyond the B
matrix definition.
"""

import numpy as np

from psitruss import PhasePoint, build_b_matrix


def kkt_project_e(problem, c, z):
    """Least-distance point of the equilibrium set, dense KKT route.

    Variables: stresses sigma (independent block, equality-constrained QP)
    and displacements u (unconstrained weighted least squares after the
    essential BCs are substituted).
    """
    b = build_b_matrix(problem).toarray()
    w = problem.volumes
    free = problem.bcs.free_dofs()
    prescribed = problem.bcs.prescribed_dofs
    u_hat = problem.bcs.prescribed_values

    # --- stress block: min 0.5 sum w_e (s - s')^2 / c  s.t.  (B^T W s)_free = F
    a_eq = (b.T * w[None, :])[free, :]                    # n_free x N_e
    d = np.diag(w / c)
    n_e, n_c = problem.n_elements, free.size
    kkt = np.zeros((n_e + n_c, n_e + n_c))
    kkt[:n_e, :n_e] = d
    kkt[:n_e, n_e:] = a_eq.T
    kkt[n_e:, :n_e] = a_eq
    rhs = np.concatenate([d @ z.stress, problem.bcs.forces[free]])
    sigma = np.linalg.solve(kkt, rhs)[:n_e]

    # --- strain block: min 0.5 sum w_e c (B u - e')^2  with  u_p = u_hat
    bw = b * (w * c)[:, None]
    normal = b.T @ bw                                      # = K
    rhs_u = b.T @ (w * c * z.strain)
    u = np.zeros(problem.n_dofs)
    u[prescribed] = u_hat
    a_ff = normal[np.ix_(free, free)]
    rhs_f = rhs_u[free] - normal[np.ix_(free, prescribed)] @ u_hat
    u[free] = np.linalg.solve(a_ff, rhs_f)

    return PhasePoint(b @ u, sigma), u
