"""Closed-form iterates, contraction rates, and convergence diagnostics for
the single-bar benchmark.

For one bar with a linear law, both projections are affine maps and the
n-th iterate is available explicitly; the per-iteration error contraction is
1 / (1 + (Y/C)^2), the squared cosine of the angle between the two sets.
Everything in this module is a pure function, independent of the solver
loop, so it can serve as an oracle against it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import RateFitError
from .materials import MaterialLaw
from .phase_space import ElementState


def closed_form_iterate(y: float, c: float, f_over_a: float,
                        eps0: float, sig0: float, n: int) -> ElementState:
    """n-th on-law iterate of the single-bar linear benchmark.

    Evaluates the explicit affine recurrence: the start decays by
    q = 1/(1 + (Y/C)^2) per iteration, the limit (F/(A*Y), F/A) is approached
    through the partial geometric sum (note sig0 never enters: the start is
    on the law, so its stress is determined by eps0).
    """
    alpha2 = (y / c) ** 2
    q = 1.0 / (1.0 + alpha2)
    qn = q**n
    # alpha^2 * sum_{i=1..n} q^i telescopes to 1 - q^n.
    s = 1.0 - qn if n > 0 else 0.0
    eps = qn * eps0 + s * f_over_a / y
    sig = qn * (y * eps0) + s * f_over_a
    return ElementState(eps, sig)


def friedrichs_rate(y: float, c: float) -> float:
    """Per-iteration error contraction factor 1 / (1 + (Y/C)^2)."""
    if y <= 0 or c <= 0:
        raise ValueError("modulus and distance constant must be > 0")
    return 1.0 / (1.0 + (y / c) ** 2)


@dataclass(frozen=True)
class RateEstimate:
    """Geometric rate fitted to the tail of an error sequence."""

    beta_hat: float
    fit_residual: float
    tail_length: int


def estimate_rate(errors) -> RateEstimate:
    """Least-squares slope of log(error) over the trailing half, exponentiated.

    The leading half is discarded as pre-asymptotic transient.  Requires at
    least 6 strictly positive entries whose final third is strictly
    decreasing; anything else raises :class:`RateFitError`.
    """
    e = np.asarray(errors, dtype=float)
    if e.ndim != 1 or e.size < 6:
        raise RateFitError(f"need at least 6 error entries, got {e.size}")
    if np.any(~np.isfinite(e)) or np.any(e <= 0.0):
        raise RateFitError("errors must be finite and strictly positive")
    tail_third = e[-(e.size // 3):]
    if np.any(np.diff(tail_third) >= 0.0):
        raise RateFitError("final third of the error sequence is not "
                           "strictly decreasing")
    tail = e[e.size // 2:]
    n = np.arange(tail.size, dtype=float)
    log_e = np.log(tail)
    slope, intercept = np.polyfit(n, log_e, 1)
    resid = float(np.sqrt(np.mean((log_e - (slope * n + intercept)) ** 2)))
    return RateEstimate(beta_hat=float(math.exp(slope)), fit_residual=resid,
                        tail_length=tail.size)


def perturbed_projection(eps: float, sig: float, y: float, c: float,
                         k: float) -> float:
    """First-order-in-k strain projection for the quadratically perturbed law.

    The k = 0 term is the linear-law projection; the correction term comes
    from the regular expansion of the stationarity cubic in the small
    parameter.
    """
    alpha2 = (y / c) ** 2
    base = (eps + sig * y / c**2) / (1.0 + alpha2)
    c2 = c * c
    corr = (y * (c2 * eps + sig * y)
            * (sig * y * y + c2 * (-2.0 * sig + 3.0 * eps * y))
            / (c2 + y * y) ** 3)
    return base + k * corr


def bisect_stress(law: MaterialLaw, target: float, lo: float, hi: float,
                  rel_tol: float = 1e-15, max_iter: int = 200) -> float:
    """Plain bisection for m(eps) = target; deliberately independent of both
    solvers so it can referee between them."""
    f_lo = law.stress(lo) - target
    f_hi = law.stress(hi) - target
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0.0:
        raise ValueError(f"[{lo}, {hi}] does not bracket m(eps) = {target}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = law.stress(mid) - target
        if f_mid == 0.0 or (hi - lo) <= rel_tol * max(abs(lo), abs(hi), 1e-300):
            return mid
        if f_lo * f_mid < 0.0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
    return 0.5 * (lo + hi)


def solution_strain(law: MaterialLaw, f_over_a: float) -> float:
    """Strain at which the law carries the stress F/A, by bisection on the
    monotone branch: the bracket grows geometrically from the zero-strain
    linear estimate until it straddles the target."""
    if f_over_a == 0.0:
        return 0.0
    y0 = law.zero_strain_modulus()
    hi = 2.0 * abs(f_over_a) / y0 + 1e-12
    sign = 1.0 if f_over_a > 0 else -1.0
    for _ in range(80):
        if sign * (law.stress(sign * hi) - f_over_a) >= 0.0:
            return bisect_stress(law, f_over_a, min(0.0, sign * hi),
                                 max(0.0, sign * hi))
        hi *= 2.0
    raise ValueError(f"law never reaches stress {f_over_a}")


def project_onto_line(eps: float, sig: float, eps_ref: float, sig_ref: float,
                      slope: float, c: float) -> float:
    """Strain of the metric projection of (eps, sig) onto the straight line
    through (eps_ref, sig_ref) with the given slope."""
    c2 = c * c
    return ((c2 * eps + slope * (sig - sig_ref) + slope * slope * eps_ref)
            / (c2 + slope * slope))


@dataclass(frozen=True)
class BoundingLineReport:
    """Outcome of the tangent-line comparison along a strain trajectory.

    ``ordering_preserved``: the tangent-line iteration maps ordered strains
    to ordered strains.  ``dominates_line``: from every trajectory point the
    on-law projection ends at least as close to the solution strain as the
    tangent-line projection.  The first violating pair (if any) is recorded.
    """

    ordering_preserved: bool
    dominates_line: bool
    eps_solution: float
    ordering_violation: tuple | None = None
    domination_violation: tuple | None = None

    @property
    def passed(self) -> bool:
        return self.ordering_preserved and self.dominates_line


def bounding_line_check(law: MaterialLaw, c: float, f_over_a: float,
                        trajectory, rel_slack: float = 1e-12) -> BoundingLineReport:
    """Check the two tangent-line orderings along a solver trajectory.

    ``trajectory`` is the sequence of equilibrated strains (each paired with
    the load stress F/A).  The comparison line is the law's tangent at the
    solution strain, found here by bisection.
    """
    from .material_projection import PdMethod, project_d_element

    traj = np.asarray(trajectory, dtype=float)
    if traj.ndim != 1 or traj.size < 2:
        raise ValueError("trajectory must contain at least two strains")

    eps_star = solution_strain(law, f_over_a)
    sig_star = law.stress(eps_star)
    slope = law.tangent(eps_star)
    scale = max(abs(eps_star), 1e-12)

    ordering_ok, ordering_pair = True, None
    strains = np.sort(traj)
    images = np.array([project_onto_line(e, f_over_a, eps_star, sig_star,
                                         slope, c) for e in strains])
    for a, b, ia, ib in zip(strains[:-1], strains[1:], images[:-1], images[1:]):
        if a < b and not ia < ib + rel_slack * scale:
            ordering_ok, ordering_pair = False, (float(a), float(b))
            break

    dominates, dom_pair = True, None
    method = PdMethod(kind="minimize")
    for e in traj:
        e_line = project_onto_line(e, f_over_a, eps_star, sig_star, slope, c)
        e_nl = project_d_element((e, f_over_a), law, c, method).strain
        if abs(eps_star - e_nl) > abs(eps_star - e_line) + rel_slack * scale:
            dominates, dom_pair = False, (float(e), float(e_nl), float(e_line))
            break

    return BoundingLineReport(ordering_preserved=ordering_ok,
                              dominates_line=dominates,
                              eps_solution=float(eps_star),
                              ordering_violation=ordering_pair,
                              domination_violation=dom_pair)
