"""Figure rendering for the CLI report paths.

Every function writes a PNG next to the delimited output and stays silent;
nothing here is interactive.  Figures are a convenience layer only — the
CSV/JSON files remain the machine-readable source of truth.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _finalize(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def residual_history(traces: dict, path, tol1=None, tol2=None):
    """Force residual and phase-space step per iteration, log scale.

    ``traces`` maps a label (e.g. solver name) to an IterationTrace.
    """
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, trace in traces.items():
        its = np.arange(1, len(trace) + 1)
        ax.semilogy(its, trace.residual_rel, marker="o", ms=3,
                    label=f"{label}: force residual")
        steps = np.asarray(trace.ps_step_rel, dtype=float)
        finite = np.isfinite(steps)
        if finite.any() and np.any(steps[finite] > 0):
            ax.semilogy(its[finite], steps[finite], marker="s", ms=3, ls="--",
                        label=f"{label}: phase-space step")
    if tol1 is not None:
        ax.axhline(tol1, color="k", lw=0.8, ls=":", label="tol1")
    if tol2 is not None:
        ax.axhline(tol2, color="gray", lw=0.8, ls=":", label="tol2")
    ax.set_xlabel("iteration")
    ax.set_ylabel("relative magnitude")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    _finalize(fig, path)


def phase_trajectories(history, law, path, elements=None, stress_scale=None):
    """On-law iterates of selected elements over the law curve."""
    if not history:
        return
    n_e = history[0].n_elements
    if elements is None:
        elements = list(range(min(n_e, 4)))
    eps_all = np.concatenate([z.strain for z in history])
    span = max(np.abs(eps_all).max(), 1e-9) * 1.2
    grid = np.linspace(-span, span, 400)
    curve = np.asarray(law.stress(grid), dtype=float)

    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.plot(grid, curve, "k-", lw=1.0, label="constitutive law")
    for e in elements:
        pts = np.array([[z.strain[e], z.stress[e]] for z in history])
        ax.plot(pts[:, 0], pts[:, 1], marker="o", ms=3, lw=0.8,
                label=f"element {e}")
    ax.set_xlabel("strain")
    ax.set_ylabel("stress [Pa]")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    _finalize(fig, path)


def rate_fit(errors, beta_hat, friedrichs, path):
    """Error decay against the fitted and predicted geometric rates."""
    errors = np.asarray(errors, dtype=float)
    its = np.arange(1, errors.size + 1)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.semilogy(its, errors, "o", ms=4, label="measured error")
    e0 = errors[0]
    ax.semilogy(its, e0 * friedrichs ** (its - 1.0), "k--", lw=1.0,
                label=f"predicted rate {friedrichs:.6g}")
    ax.semilogy(its, e0 * beta_hat ** (its - 1.0), "r:", lw=1.0,
                label=f"fitted rate {beta_hat:.6g}")
    ax.set_xlabel("iteration")
    ax.set_ylabel("phase-space error")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    _finalize(fig, path)


def deformed_shape(problem, solutions: dict, path, amplify=None):
    """Undeformed mesh overlaid with amplified deformed shapes."""
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    nodes = problem.nodes
    if amplify is None:
        umax = max(float(np.abs(s.u).max()) for s in solutions.values()) or 1.0
        span = float(nodes.max() - nodes.min()) or 1.0
        amplify = 0.1 * span / umax
    for a, b in problem.connectivity:
        ax.plot(nodes[[a, b], 0], nodes[[a, b], 1], color="0.8", lw=0.8)
    colors = ["C0", "C1", "C2"]
    for i, (label, sol) in enumerate(solutions.items()):
        disp = nodes + amplify * sol.u.reshape(-1, problem.dim)[:, :2]
        for a, b in problem.connectivity:
            ax.plot(disp[[a, b], 0], disp[[a, b], 1], color=colors[i % 3],
                    lw=0.9, alpha=0.8)
        ax.plot([], [], color=colors[i % 3], label=f"{label} (x{amplify:.3g})")
    ax.set_aspect("equal")
    ax.legend(fontsize=8)
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    _finalize(fig, path)
