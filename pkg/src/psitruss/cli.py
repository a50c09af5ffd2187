"""Command-line front end.

Subcommands
-----------
solve       solve a problem file with the projection solver or damped NR
compare     run both solvers on one problem and report the differences
analyze-1d  single-bar diagnostics: trajectory, errors, expansion checks
rate        serial-bar rate benchmark against the closed-form contraction
gen-truss   write a generated test-truss problem file
nn-check    validate an exported MLP weight file

All commands emit machine-readable CSV/JSON only; ``--plot`` additionally
renders PNG figures next to the delimited output.  Exit codes: 0 success,
1 input/validation error, 2 solver hit the iteration cap.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import analysis, benchmarks, plots
from .errors import (FileFormatError, GeometryError, ModelingError,
                     ProjectionError, RateFitError, ShapeMismatchError)
from .materials import (LinearLaw, PowerLaw, QuadraticPerturbedLaw,
                        load_weight_file)
from .material_projection import PdMethod, solve_el_cubic
from .mesh import generate_truss, load_problem, save_problem, save_results
from .newton import NrConfig, nr_solve
from .phase_space import Metric, ps_norm, PhasePoint
from .solver import STOP_MAXITER, SolverConfig, psi_solve

_INPUT_ERRORS = (FileFormatError, GeometryError, ModelingError,
                 ProjectionError, RateFitError, ShapeMismatchError,
                 ValueError, OSError)


def _default_workers() -> int:
    try:
        return max(1, int(os.environ.get("PSI_WORKERS", "1")))
    except ValueError:
        return 1


def _add_solver_flags(p: argparse.ArgumentParser):
    p.add_argument("--c-over-y0", type=float, default=None,
                   help="distance constant as a fraction of the zero-strain modulus")
    p.add_argument("--tol1", type=float, default=None,
                   help="relative force-residual tolerance")
    p.add_argument("--tol2", type=float, default=None,
                   help="relative phase-space step tolerance (default tol1/10)")
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--workers", type=int, default=_default_workers(),
                   help="worker processes for the per-element projections "
                        "(default: PSI_WORKERS or 1)")
    p.add_argument("--pd-method", choices=["minimize", "newton", "secant"],
                   default=None, help="per-element projection back end")


def _psi_config(problem, args) -> SolverConfig:
    overrides = dict(c_over_y0=args.c_over_y0, tol1=args.tol1, tol2=args.tol2,
                     max_iter=args.max_iter)
    if args.pd_method is not None:
        overrides["pd_method"] = PdMethod(kind=args.pd_method)
    overrides["workers"] = args.workers
    return SolverConfig.from_problem(problem, **overrides)


def _plot_path(base, suffix) -> str:
    base = Path(base)
    return str(base.with_name(base.stem + suffix + ".png"))


def cmd_solve(args) -> int:
    problem = load_problem(args.problem)
    if args.method == "psi":
        config = _psi_config(problem, args)
        solution = psi_solve(problem, config, keep_history=bool(args.plot))
        tols = (config.tol1, config.step_tol)
    else:
        config = NrConfig(gamma=args.damping,
                          tol=args.tol1 if args.tol1 is not None else 5e-2,
                          max_iter=args.max_iter if args.max_iter else 200)
        solution = nr_solve(problem, config)
        tols = (config.tol, None)
    save_results(args.out, solution)
    if args.trace:
        solution.trace.to_csv(args.trace)
    if args.plot:
        plots.residual_history({solution.solver: solution.trace},
                               _plot_path(args.out, "_residual"),
                               tol1=tols[0], tol2=tols[1])
        if solution.history:
            plots.phase_trajectories(solution.history, problem.law,
                                     _plot_path(args.out, "_phase"))
    print(f"{solution.solver}: {solution.stop_reason} after "
          f"{solution.iterations} iterations, residual "
          f"{solution.residual_rel:.3e}")
    return 0 if solution.stop_reason != STOP_MAXITER else 2


def cmd_compare(args) -> int:
    problem = load_problem(args.problem)
    config = _psi_config(problem, args)

    t0 = time.perf_counter()
    psi = psi_solve(problem, config)
    t_psi = time.perf_counter() - t0
    t0 = time.perf_counter()
    nr = nr_solve(problem, NrConfig(tol=config.tol1))
    t_nr = time.perf_counter() - t0

    ref = float(np.linalg.norm(nr.u))
    diff = float(np.linalg.norm(psi.u - nr.u)) / ref if ref > 0 else \
        float(np.linalg.norm(psi.u - nr.u))
    rows = [
        ("psi", psi.converged, psi.stop_reason, psi.iterations,
         f"{t_psi:.4f}", f"{sum(psi.trace.t_pe_ms):.2f}",
         f"{sum(psi.trace.t_pd_ms):.2f}", repr(diff)),
        ("nr", nr.converged, nr.stop_reason, nr.iterations,
         f"{t_nr:.4f}", f"{sum(nr.trace.t_pe_ms):.2f}",
         f"{sum(nr.trace.t_pd_ms):.2f}", repr(diff)),
    ]
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["solver", "converged", "stop_reason", "iterations",
                         "wall_s", "t_pe_ms_total", "t_pd_ms_total",
                         "u_rel_l2_diff"])
        writer.writerows(rows)
    if args.plot:
        plots.residual_history({"psi": psi.trace, "nr": nr.trace},
                               _plot_path(args.out, "_residual"),
                               tol1=config.tol1, tol2=config.step_tol)
        plots.deformed_shape(problem, {"psi": psi, "nr": nr},
                             _plot_path(args.out, "_shape"))
    print(f"psi: {psi.iterations} it / nr: {nr.iterations} it, "
          f"u rel L2 diff {diff:.3e}")
    if psi.stop_reason == STOP_MAXITER or nr.stop_reason == STOP_MAXITER:
        return 2
    return 0


def _make_1d_law(args):
    if args.law == "linear":
        return LinearLaw(y=args.y0)
    if args.law == "quadratic":
        return QuadraticPerturbedLaw(y=args.y0, k=args.k)
    return PowerLaw(y0=args.y0, p=args.p)


def cmd_analyze_1d(args) -> int:
    law = _make_1d_law(args)
    problem = benchmarks.single_bar_problem(law, args.f_over_a)
    config = SolverConfig(c_over_y0=args.c_over_y0, tol1=1e-14, tol2=1e-15,
                          max_iter=args.iters,
                          pd_method=PdMethod(kind="minimize" if not
                                             law.tangent_is_exact else "newton"))
    solution = psi_solve(problem, config, keep_history=True)
    c = args.c_over_y0 * law.zero_strain_modulus()
    metric = Metric(c=c, volumes=problem.volumes)

    eps_star = analysis.solution_strain(law, args.f_over_a)
    z_star = PhasePoint([eps_star], [law.stress(eps_star)])

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    history = solution.history
    errors = [ps_norm(PhasePoint(z.strain - z_star.strain,
                                 z.stress - z_star.stress), metric)
              for z in history]
    with open(out_dir / "trajectory.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iter", "strain", "stress", "error"])
        for n, (z, e) in enumerate(zip(history, errors)):
            writer.writerow([n, repr(float(z.strain[0])),
                             repr(float(z.stress[0])), repr(e)])

    checks = [("solution_strain", repr(eps_star)),
              ("iterations", solution.iterations),
              ("stop_reason", solution.stop_reason)]
    positive = [e for e in errors if e > 0]
    if len(positive) >= 6:
        est = analysis.estimate_rate(positive)
        checks.append(("beta_hat", repr(est.beta_hat)))
        checks.append(("friedrichs_at_solution",
                       repr(analysis.friedrichs_rate(law.tangent(eps_star), c))))
    if args.law == "quadratic":
        exact = solve_el_cubic((0.0, args.f_over_a), args.y0, args.k, c)
        approx = analysis.perturbed_projection(0.0, args.f_over_a, args.y0,
                                               c, args.k)
        checks.append(("expansion_abs_error", repr(abs(exact - approx))))
    traj = [float(z.strain[0]) for z in history[:-1]]
    if len(traj) >= 2:
        report = analysis.bounding_line_check(law, c, args.f_over_a, traj)
        checks.append(("ordering_preserved", report.ordering_preserved))
        checks.append(("dominates_line", report.dominates_line))
    with open(out_dir / "checks.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["name", "value"])
        writer.writerows(checks)

    if args.plot:
        plots.phase_trajectories(history, law, out_dir / "phase.png")
        if positive:
            est = analysis.estimate_rate(positive) if len(positive) >= 6 else None
            plots.rate_fit(positive,
                           est.beta_hat if est else 1.0,
                           analysis.friedrichs_rate(law.tangent(eps_star), c),
                           out_dir / "errors.png")
    print(f"wrote {out_dir}/trajectory.csv and checks.csv "
          f"({solution.iterations} iterations)")
    return 0


def cmd_rate(args) -> int:
    law = LinearLaw(y=args.y)
    lengths = benchmarks.unequal_lengths(args.ne, args.len_ratio)
    problem = benchmarks.serial_bars_problem(law, f_over_a=1.0, lengths=lengths)
    config = SolverConfig(c_over_y0=args.c / args.y, tol1=1e-300, tol2=1e-300,
                          max_iter=args.iters, pd_method=PdMethod(kind="newton"))
    solution = psi_solve(problem, config, keep_history=True)

    c = args.c
    metric = Metric(c=c, volumes=problem.volumes)
    eps_star = 1.0 / args.y
    z_star = PhasePoint(np.full(problem.n_elements, eps_star),
                        np.ones(problem.n_elements))
    errors = [ps_norm(PhasePoint(z.strain - z_star.strain,
                                 z.stress - z_star.stress), metric)
              for z in solution.history[1:]]
    positive = [e for e in errors if e > 0]
    beta = analysis.estimate_rate(positive).beta_hat
    fr = analysis.friedrichs_rate(args.y, args.c)

    rows = [[n + 1, repr(e), repr(beta), repr(fr)]
            for n, e in enumerate(errors)]
    out = args.out or "rate.csv"
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "error", "beta_hat", "friedrichs"])
        writer.writerows(rows)
    if args.plot:
        plots.rate_fit(positive, beta, fr, _plot_path(out, "_fit"))
    print(f"beta_hat {beta:.8f} vs friedrichs {fr:.8f} "
          f"({args.ne} bars, length ratio {args.len_ratio})")
    return 0


def cmd_gen_truss(args) -> int:
    material = {"type": args.material}
    if args.material == "power":
        material.update({"Y0": args.y0, "p": args.p})
        law = PowerLaw(y0=args.y0, p=args.p)
    elif args.material == "linear":
        material.update({"Y0": args.y0})
        law = LinearLaw(y=args.y0)
    elif args.material == "quadratic":
        material.update({"Y0": args.y0, "k": args.k})
        law = QuadraticPerturbedLaw(y=args.y0, k=args.k)
    else:
        if not args.weights:
            raise FileFormatError("--weights is required for --material neural")
        material.update({"weights_path": args.weights})
        law = load_weight_file(args.weights).law
    solver = {"c_over_y0": args.c_over_y0, "tol1": args.tol1,
              "tol2": args.tol1 / 10.0, "max_iter": 500,
              "pd_method": "minimize"}
    problem = generate_truss(args.rows, args.cols, spacing=args.spacing,
                             area=args.area, law=law, load=args.load,
                             settle=args.settle, solver_defaults=solver,
                             material_spec=material)
    save_problem(args.out, problem)
    print(f"wrote {args.out}: {problem.n_nodes} nodes, "
          f"{problem.n_elements} bars, {problem.n_dofs} DOFs")
    return 0


def cmd_nn_check(args) -> int:
    wf = load_weight_file(args.weights)
    n_params = wf.parameter_count
    if args.expect_params is not None and n_params != args.expect_params:
        print(f"parameter count {n_params} != expected {args.expect_params}",
              file=sys.stderr)
        return 1
    law = wf.law
    sig_span = law.sig_max - law.sig_min
    predicted = np.asarray(law.stress(wf.reference[:, 0]), dtype=float)
    err_norm = np.abs(predicted - wf.reference[:, 1]) / sig_span
    worst = int(np.argmax(err_norm))
    if err_norm[worst] > args.tol:
        print(f"reference mismatch: worst sample {worst} at strain "
              f"{wf.reference[worst, 0]:.6e}: predicted "
              f"{predicted[worst]:.6e} vs stored {wf.reference[worst, 1]:.6e} "
              f"({err_norm[worst]:.3e} of range, tol {args.tol:.1e})",
              file=sys.stderr)
        return 1
    print(f"ok: {len(wf.law.weights)} layers, {n_params} parameters, "
          f"{wf.reference.shape[0]} reference samples within "
          f"{err_norm[worst]:.2e} of range")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="psitruss", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a problem file")
    p.add_argument("--problem", required=True)
    p.add_argument("--method", choices=["psi", "nr"], required=True)
    _add_solver_flags(p)
    p.add_argument("--damping", type=float, default=0.8,
                   help="NR damping factor (tangent share of the blend)")
    p.add_argument("--out", required=True, help="results JSON path")
    p.add_argument("--trace", default=None, help="trace CSV path")
    p.add_argument("--plot", action="store_true",
                   help="render PNG figures next to the outputs")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("compare", help="run both solvers and diff them")
    p.add_argument("--problem", required=True)
    _add_solver_flags(p)
    p.add_argument("--out", required=True, help="report CSV path")
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("analyze-1d", help="single-bar diagnostics")
    p.add_argument("--law", choices=["linear", "quadratic", "power"],
                   default="linear")
    p.add_argument("--y0", type=float, default=1.0)
    p.add_argument("--k", type=float, default=0.01)
    p.add_argument("--p", type=float, default=1e-4)
    p.add_argument("--c-over-y0", type=float, default=1.0)
    p.add_argument("--f-over-a", type=float, default=1.0)
    p.add_argument("--iters", type=int, default=40)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_analyze_1d)

    p = sub.add_parser("rate", help="serial-bar convergence-rate benchmark")
    p.add_argument("--y", type=float, required=True, help="Young modulus")
    p.add_argument("--c", type=float, required=True, help="distance constant")
    p.add_argument("--ne", type=int, default=1, help="number of serial bars")
    p.add_argument("--len-ratio", type=float, default=1.0,
                   help="longest/shortest bar length ratio")
    p.add_argument("--iters", type=int, default=25)
    p.add_argument("--out", default=None, help="CSV path (default rate.csv)")
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("gen-truss", help="write a generated test truss")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--spacing", type=float, default=1.0)
    p.add_argument("--area", type=float, default=1e-4)
    p.add_argument("--load", type=float, default=-1000.0,
                   help="vertical force at interior top-chord nodes [N]")
    p.add_argument("--settle", type=float, default=0.0,
                   help="imposed downward displacement of the central "
                        "top-chord nodes [m]")
    p.add_argument("--material",
                   choices=["power", "linear", "quadratic", "neural"],
                   default="power")
    p.add_argument("--y0", type=float, default=2e11)
    p.add_argument("--p", type=float, default=1e-4)
    p.add_argument("--k", type=float, default=0.01)
    p.add_argument("--weights", default=None,
                   help="weight file for --material neural")
    p.add_argument("--c-over-y0", type=float, default=0.3)
    p.add_argument("--tol1", type=float, default=5e-2)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_truss)

    p = sub.add_parser("nn-check", help="validate an MLP weight file")
    p.add_argument("--weights", required=True)
    p.add_argument("--expect-params", type=int, default=None)
    p.add_argument("--tol", type=float, default=1e-6,
                   help="reference tolerance, fraction of the stress range")
    p.set_defaults(func=cmd_nn_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
