"""The alternating-projection solve loop with its dual stop criterion.

Each iteration projects the current materially-admissible point onto the
equilibrium set and straight back onto the law.  The loop stops when either
the relative force residual of the on-law stresses drops below ``tol1`` or
the relative phase-space step between consecutive on-law points drops below
``tol2`` — the residual is *not* monotone and the trace records whatever it
does.
"""

from __future__ import annotations

import csv
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .equilibrium import assemble_k, internal_force, reactions, project_e
from .material_projection import PdMethod, project_d
from .mesh import TrussProblem, build_b_matrix
from .phase_space import Metric, PhasePoint, ps_distance, ps_norm

STOP_FORCE = "force_residual"
STOP_STEP = "phase_space_step"
STOP_MAXITER = "max_iter"


@dataclass(frozen=True)
class SolverConfig:
    """Knobs of the projection solver.

    ``c_over_y0`` scales the distance constant against the law's zero-strain
    modulus (0.3 is a solid default for strongly nonlinear laws); ``tol2``
    defaults to ``tol1 / 10``.
    """

    c_over_y0: float = 0.3
    tol1: float = 5e-2
    tol2: float | None = None
    max_iter: int = 500
    pd_method: PdMethod = field(default_factory=PdMethod)
    workers: int = 1

    def __post_init__(self):
        if self.c_over_y0 <= 0:
            raise ValueError("c_over_y0 must be > 0")
        if self.tol1 <= 0 or (self.tol2 is not None and self.tol2 <= 0):
            raise ValueError("tolerances must be > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @property
    def step_tol(self) -> float:
        return self.tol2 if self.tol2 is not None else self.tol1 / 10.0

    @classmethod
    def from_problem(cls, problem: TrussProblem, **overrides) -> "SolverConfig":
        """Defaults from the problem file's solver block, then overrides."""
        merged = {}
        defaults = problem.solver_defaults
        for key in ("c_over_y0", "tol1", "tol2", "max_iter"):
            if key in defaults:
                merged[key] = defaults[key]
        if "pd_method" in defaults:
            merged["pd_method"] = PdMethod(kind=defaults["pd_method"])
        merged.update({k: v for k, v in overrides.items() if v is not None})
        if "max_iter" in merged:
            merged["max_iter"] = int(merged["max_iter"])
        return cls(**merged)


@dataclass
class IterationTrace:
    """Per-iteration diagnostics; one entry per completed iteration."""

    residual_rel: list = field(default_factory=list)
    ps_step_rel: list = field(default_factory=list)
    t_pe_ms: list = field(default_factory=list)
    t_pd_ms: list = field(default_factory=list)
    stop_reason: str = STOP_MAXITER

    def __len__(self):
        return len(self.residual_rel)

    def append(self, residual, step, t_pe, t_pd):
        self.residual_rel.append(residual)
        self.ps_step_rel.append(step)
        self.t_pe_ms.append(t_pe)
        self.t_pd_ms.append(t_pd)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iter", "residual_rel", "ps_step_rel",
                             "t_pe_ms", "t_pd_ms"])
            for i in range(len(self)):
                writer.writerow([i + 1, repr(self.residual_rel[i]),
                                 repr(self.ps_step_rel[i]),
                                 f"{self.t_pe_ms[i]:.3f}",
                                 f"{self.t_pd_ms[i]:.3f}"])


@dataclass
class Solution:
    """Converged (or flagged non-converged) state of a solve."""

    solver: str
    u: np.ndarray
    strains: np.ndarray
    stresses: np.ndarray
    reaction_dofs: np.ndarray
    reaction_values: np.ndarray
    trace: IterationTrace
    stop_reason: str
    iterations: int
    residual_rel: float
    converged: bool
    history: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "solver": self.solver,
            "converged": bool(self.converged),
            "stop_reason": self.stop_reason,
            "iterations": int(self.iterations),
            "residual_rel": float(self.residual_rel),
            "displacements": [float(x) for x in self.u],
            "strains": [float(x) for x in self.strains],
            "stresses": [float(x) for x in self.stresses],
            "reactions": [
                {"dof": int(d), "value": float(v)}
                for d, v in zip(self.reaction_dofs, self.reaction_values)
            ],
        }


def residual_reference(problem: TrussProblem, c: float) -> float:
    """Normalizer for the force residual: ||F_ext|| on free DOFs, or — for
    pure imposed-displacement loading — the absolute scale C * mean(area)."""
    free = problem.bcs.free_dofs()
    ref = float(np.linalg.norm(problem.bcs.forces[free]))
    if ref == 0.0:
        ref = c * float(np.mean(problem.areas))
    return ref


def init_point(problem: TrussProblem) -> PhasePoint:
    """Start on the law: zero states except that bars touching a prescribed
    node pick up the strain of the imposed displacements."""
    u_hat = problem.bcs.full_prescribed_vector()
    eps = build_b_matrix(problem) @ u_hat
    sig = np.asarray(problem.law.stress(eps), dtype=float)
    return PhasePoint(eps, sig)


def psi_solve(problem: TrussProblem, config: SolverConfig | None = None,
              keep_history: bool = False) -> Solution:
    """Alternate equilibrium and material projections until the dual stop
    criterion fires.

    Returns the displacements of the last equilibrium projection together
    with the final on-law strains/stresses.  ``keep_history`` additionally
    records every on-law iterate (for diagnostics and rate studies).
    """
    config = config or SolverConfig.from_problem(problem)
    law = problem.law
    c = config.c_over_y0 * law.zero_strain_modulus()
    metric = Metric(c=c, volumes=problem.volumes)
    fact = assemble_k(problem, c)
    free = fact.free
    f_ext_free = problem.bcs.forces[free]
    ref = residual_reference(problem, c)

    z = init_point(problem)
    trace = IterationTrace()
    history = [z] if keep_history else []
    u = np.zeros(problem.n_dofs)
    sigma_e = z.stress
    executor = None
    if config.workers > 1:
        executor = ProcessPoolExecutor(max_workers=config.workers)
    try:
        stop = STOP_MAXITER
        residual_rel = np.inf
        for _ in range(config.max_iter):
            t0 = time.perf_counter()
            z_e, u, _eta = project_e(z, fact)
            t1 = time.perf_counter()
            z_new = project_d(z_e, law, metric, config.pd_method,
                              workers=config.workers, executor=executor)
            t2 = time.perf_counter()

            sigma_e = z_e.stress
            res = internal_force(fact, z_new.stress)[free] - f_ext_free
            residual_rel = float(np.linalg.norm(res)) / ref
            denom = ps_norm(z, metric)
            step_rel = (ps_distance(z_new, z, metric) / denom
                        if denom > 0.0 else np.inf)
            trace.append(residual_rel, step_rel,
                         (t1 - t0) * 1e3, (t2 - t1) * 1e3)
            if keep_history:
                history.append(z_new)
            z = z_new
            if residual_rel < config.tol1:
                stop = STOP_FORCE
                break
            if step_rel < config.step_tol:
                stop = STOP_STEP
                break
    finally:
        if executor is not None:
            executor.shutdown()

    trace.stop_reason = stop
    converged = stop != STOP_MAXITER
    return Solution(
        solver="psi",
        u=u,
        strains=z.strain.copy(),
        stresses=z.stress.copy(),
        reaction_dofs=fact.prescribed.copy(),
        reaction_values=reactions(fact, sigma_e),
        trace=trace,
        stop_reason=stop,
        iterations=len(trace),
        residual_rel=residual_rel,
        converged=converged,
        history=history,
    )
