"""Projection onto the constitutive law, one independent problem per bar.

Each element minimizes

    g(e) = C (e - eps)^2 / 2 + (m(e) - sig)^2 / (2 C)

over the candidate strain ``e``; the projected point is (e*, m(e*)), so the
output always sits exactly on the law.  Three interchangeable back ends:

* ``minimize``  — bounded derivative-free minimization of g (Brent),
* ``newton``    — safeguarded Newton on the stationarity equation
                  e - eps - (sig - m(e)) m'(e) / C^2 = 0,
* ``secant``    — same root, derivative-free secant steps.

The per-element problems are independent, so the element map can be farmed
out to worker processes; chunks are concatenated in element order, which
keeps the output bitwise identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ProjectionError
from .materials import MaterialLaw
from .phase_space import ElementState, Metric, PhasePoint

_METHODS = ("minimize", "newton", "secant")


@dataclass(frozen=True)
class PdMethod:
    """Choice of per-element projection back end with its knobs.

    ``strain_floor`` pads the search bracket [eps - R, eps + R] with
    R = |eps| + |sig|/Y0 + strain_floor so a zero state still brackets.
    """

    kind: str = "minimize"
    rel_tol: float = 1e-12
    max_iter: int = 200
    strain_floor: float = 1e-6

    def __post_init__(self):
        if self.kind not in _METHODS:
            raise ValueError(f"unknown projection method {self.kind!r}; "
                             f"choose from {_METHODS}")
        if self.rel_tol <= 0 or self.max_iter < 1 or self.strain_floor <= 0:
            raise ValueError("tolerances and iteration caps must be positive")


def _bracket_radius(eps, sig, y0, floor):
    return abs(eps) + abs(sig) / y0 + floor


def _distance_objective(law, c, eps, sig):
    def g(e):
        ds = law.stress(e) - sig
        return 0.5 * c * (e - eps) ** 2 + 0.5 * ds * ds / c
    return g


def _stationarity(law, c, eps, sig):
    c2 = c * c

    def h(e):
        return e - eps - (sig - law.stress(e)) * law.tangent(e) / c2
    return h


_SCAN_POINTS = 65


def _minimize_element(law, c, eps, sig, method: PdMethod) -> float:
    """Coarse scan to pick the basin, bounded Brent to polish it.

    The documented bracket [eps - R, eps + R] is only a starting guess: for
    strongly concave laws the stationary strain can sit beyond |sig|/Y0, so
    the bracket doubles whenever the scan minimum lands on its edge.  The
    scan also keeps multi-minima objectives (wiggly MLP laws) honest by
    seeding Brent inside the deepest sampled basin.
    """
    r = _bracket_radius(eps, sig, law.zero_strain_modulus(), method.strain_floor)
    g = _distance_objective(law, c, eps, sig)
    for _ in range(60):
        grid = np.linspace(eps - r, eps + r, _SCAN_POINTS)
        ds = np.asarray(law.stress(grid), dtype=float) - sig
        values = 0.5 * c * (grid - eps) ** 2 + 0.5 * ds * ds / c
        i = int(np.argmin(values))
        if i == 0 or i == _SCAN_POINTS - 1:
            r *= 2.0
            continue
        lo, hi = grid[i - 1], grid[i + 1]
        xatol = method.rel_tol * max(abs(eps), method.strain_floor)
        res = minimize_scalar(g, bounds=(lo, hi), method="bounded",
                              options={"xatol": xatol,
                                       "maxiter": method.max_iter})
        if not res.success:
            raise ProjectionError(
                f"bounded minimization did not converge in {method.max_iter} "
                "evaluations", last_strain=float(res.x))
        return _parabolic_polish(g, float(res.x), method.strain_floor, lo, hi)
    raise ProjectionError("could not bracket the distance minimum",
                          last_strain=eps)


def _parabolic_polish(g, x, floor, lo, hi):
    """Centered three-point parabolic vertex steps around ``x``.

    Function-value minimizers stall at ~sqrt(machine eps) relative accuracy
    because g is flat to first order at the minimum; fitting the local
    parabola explicitly recovers a few more digits.  Steps are clamped to
    the sampling width, and a step is only kept while the fitted curvature
    stays positive.
    """
    h = 6e-6 * max(abs(x), floor)
    for _ in range(2):
        g_m, g_0, g_p = g(x - h), g(x), g(x + h)
        curvature = g_p - 2.0 * g_0 + g_m
        if curvature <= 0.0:
            break
        step = -0.5 * (g_p - g_m) / curvature * h
        if abs(step) > 2.0 * h:
            step = math.copysign(2.0 * h, step)
        x_new = min(max(x + step, lo), hi)
        if x_new == x:
            break
        x = x_new
        h /= 16.0
    return x


def _bracket_root(h, eps, r, max_expand=60):
    lo, hi = eps - r, eps + r
    f_lo, f_hi = h(lo), h(hi)
    for _ in range(max_expand):
        if f_lo == 0.0:
            return lo, lo, f_lo, f_lo
        if f_hi == 0.0:
            return hi, hi, f_hi, f_hi
        if f_lo * f_hi < 0.0:
            return lo, hi, f_lo, f_hi
        r *= 2.0
        lo, hi = eps - r, eps + r
        f_lo, f_hi = h(lo), h(hi)
    return None


def _newton_element(law, c, eps, sig, method: PdMethod) -> float:
    h = _stationarity(law, c, eps, sig)
    r = _bracket_radius(eps, sig, law.zero_strain_modulus(), method.strain_floor)
    bracket = _bracket_root(h, eps, r)
    if bracket is None:
        raise ProjectionError("stationarity equation has no sign change in the "
                              "expanded bracket", last_strain=eps)
    lo, hi, f_lo, _ = bracket
    if lo == hi:
        return lo

    c2 = c * c
    x, fx = eps, h(eps)
    if f_lo * fx < 0.0:
        hi = x
    else:
        lo, f_lo = x, fx
    xtol = max(1e-18, method.rel_tol * 1e-3 * max(abs(eps), method.strain_floor))
    for _ in range(method.max_iter):
        if fx == 0.0:
            return x
        # h'(x) = 1 + (m'(x)^2 - (sig - m(x)) m''(x)) / C^2 with m'' by a
        # central difference of the tangent.
        dm = law.tangent(x)
        step_fd = 1e-6 * max(1.0, abs(x))
        d2m = (law.tangent(x + step_fd) - law.tangent(x - step_fd)) / (2.0 * step_fd)
        hp = 1.0 + (dm * dm - (sig - law.stress(x)) * d2m) / c2
        x_new = x - fx / hp if hp != 0.0 else math.nan
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)  # bisect against the bracket
        f_new = h(x_new)
        if f_new == 0.0 or abs(x_new - x) <= xtol:
            return x_new
        if f_lo * f_new < 0.0:
            hi = x_new
        else:
            lo, f_lo = x_new, f_new
        x, fx = x_new, f_new
    raise ProjectionError(
        f"Newton iteration cap {method.max_iter} exceeded", last_strain=x)


def _secant_element(law, c, eps, sig, method: PdMethod) -> float:
    h = _stationarity(law, c, eps, sig)
    r = _bracket_radius(eps, sig, law.zero_strain_modulus(), method.strain_floor)
    bracket = _bracket_root(h, eps, r)
    if bracket is None:
        raise ProjectionError("stationarity equation has no sign change in the "
                              "expanded bracket", last_strain=eps)
    lo, hi, f_lo, _ = bracket
    if lo == hi:
        return lo

    # Second seed: projection onto the law linearized at eps.
    dm = law.tangent(eps)
    x0, f0 = eps, h(eps)
    x1 = eps + (sig - law.stress(eps)) * dm / (c * c + dm * dm)
    if x1 == x0:
        x1 = eps + method.strain_floor * 1e-3
    f1 = h(x1)
    xtol = max(1e-18, method.rel_tol * 1e-3 * max(abs(eps), method.strain_floor))
    for _ in range(method.max_iter):
        if f1 == 0.0:
            return x1
        denom = f1 - f0
        x_new = x1 - f1 * (x1 - x0) / denom if denom != 0.0 else math.nan
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)
        f_new = h(x_new)
        if f_new == 0.0 or abs(x_new - x1) <= xtol:
            return x_new
        if f_lo * f_new < 0.0:
            hi = x_new
        else:
            lo, f_lo = x_new, f_new
        x0, f0, x1, f1 = x1, f1, x_new, f_new
    raise ProjectionError(
        f"secant iteration cap {method.max_iter} exceeded", last_strain=x1)


_BACKENDS = {"minimize": _minimize_element,
             "newton": _newton_element,
             "secant": _secant_element}


def project_d_element(state: ElementState, law: MaterialLaw, c: float,
                      method: PdMethod = PdMethod()) -> ElementState:
    """Closest point on the law to one element state; lands exactly on it."""
    if c <= 0:
        raise ValueError(f"distance constant must be > 0, got {c}")
    if method.kind != "minimize" and not law.tangent_is_exact:
        raise ValueError(
            f"{type(law).__name__} has no reliable tangent; root-based "
            "projection methods are restricted to laws with analytic tangents")
    eps, sig = float(state[0]), float(state[1])
    if law.stress(eps) == sig:
        return ElementState(eps, sig)
    e_star = _BACKENDS[method.kind](law, c, eps, sig, method)
    return ElementState(e_star, float(law.stress(e_star)))


def _project_chunk(args):
    offset, strains, stresses, law, c, method = args
    out_e = np.empty_like(strains)
    out_s = np.empty_like(stresses)
    for i, (eps, sig) in enumerate(zip(strains, stresses)):
        try:
            out_e[i], out_s[i] = project_d_element((eps, sig), law, c, method)
        except ProjectionError as exc:
            raise ProjectionError(str(exc), element=offset + i,
                                  last_strain=exc.last_strain) from exc
    return out_e, out_s


def project_d(z: PhasePoint, law: MaterialLaw, metric: Metric,
              method: PdMethod = PdMethod(), workers: int = 1,
              executor: ProcessPoolExecutor | None = None) -> PhasePoint:
    """Elementwise projection of a whole phase point onto the law.

    The result does not depend on the worker count: elements are partitioned
    into contiguous chunks and reassembled in element order, and every chunk
    runs the exact same per-element code path.
    """
    if z.n_elements != metric.n_elements:
        raise ValueError("point and metric element counts differ")
    n = z.n_elements
    if workers <= 1 and executor is None:
        eps, sig = _project_chunk((0, z.strain, z.stress, law, metric.c, method))
        return PhasePoint(eps, sig)

    n_workers = max(workers, 1)
    bounds = np.linspace(0, n, n_workers + 1).astype(int)
    chunks = [(int(a), z.strain[a:b], z.stress[a:b], law, metric.c, method)
              for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    own = executor is None
    pool = executor or ProcessPoolExecutor(max_workers=n_workers)
    try:
        results = list(pool.map(_project_chunk, chunks))
    finally:
        if own:
            pool.shutdown()
    eps = np.concatenate([r[0] for r in results])
    sig = np.concatenate([r[1] for r in results])
    return PhasePoint(eps, sig)


def el_cubic_coeffs(state: ElementState, y: float, k: float, c: float):
    """Cubic in e' produced by the stationarity equation for the quadratic-
    perturbed law sigma = Y (eps - k eps^2).

    Returns (a3, a2, a1, a0) with a3 = -2 a^2 k^2, a2 = 3 k a^2,
    a1 = -1 - 2 k Y sig / C^2 - a^2, a0 = eps + sig Y / C^2, where a = Y/C.
    At k = 0 the cubic degenerates to the linear-law projection.
    """
    eps, sig = float(state[0]), float(state[1])
    alpha2 = (y / c) ** 2
    a3 = -2.0 * alpha2 * k * k
    a2 = 3.0 * k * alpha2
    a1 = -1.0 - 2.0 * k * y * sig / c**2 - alpha2
    a0 = eps + sig * y / c**2
    return a3, a2, a1, a0


def solve_el_cubic(state: ElementState, y: float, k: float, c: float) -> float:
    """Real root of :func:`el_cubic_coeffs` that continues the k = 0 linear
    solution; ties break toward smaller |e'|."""
    a3, a2, a1, a0 = el_cubic_coeffs(state, y, k, c)
    alpha2 = (y / c) ** 2
    linear_root = a0 / (1.0 + alpha2)
    if a3 == 0.0 and a2 == 0.0:
        return -a0 / a1
    roots = np.roots([a3, a2, a1, a0] if a3 != 0.0 else [a2, a1, a0])
    real = roots[np.abs(roots.imag) <= 1e-9 * (1.0 + np.abs(roots))].real
    if real.size == 0:
        raise ProjectionError("cubic has no real roots within tolerance")
    order = np.lexsort((np.abs(real), np.abs(real - linear_root)))
    return float(real[order[0]])


__all__ = [
    "PdMethod", "project_d_element", "project_d", "el_cubic_coeffs",
    "solve_el_cubic",
]
