"""Alternating-projection solver for small-strain nonlinear truss elasticity.

The library treats each solve as a pair of projections in a metric space of
per-element (strain, stress) pairs: one onto the set of equilibrated,
compatible states, one onto the constitutive law.  A damped Newton-Raphson
baseline, closed-form single-bar oracles, and MLP-based constitutive laws
round out the toolbox.
"""

from .analysis import (BoundingLineReport, RateEstimate, bounding_line_check,
                       closed_form_iterate, estimate_rate, friedrichs_rate,
                       perturbed_projection)
from .benchmarks import serial_bars_problem, single_bar_problem
from .equilibrium import (StiffnessFactorization, assemble_k, project_e,
                          solve_eta, solve_u, update_stress)
from .errors import (FileFormatError, GeometryError, ModelingError,
                     ProjectionError, RateFitError, ShapeMismatchError)
from .materials import (LinearLaw, MaterialLaw, NeuralLaw, PowerLaw,
                        QuadraticPerturbedLaw, WeightFile, load_weight_file)
from .material_projection import (PdMethod, el_cubic_coeffs, project_d,
                                  project_d_element, solve_el_cubic)
from .mesh import (BarElement, BoundaryConditions, TrussProblem,
                   assemble_internal_force, build_b, build_b_matrix,
                   generate_truss, load_problem, save_problem, save_results)
from .newton import NrConfig, assemble_tangent, nr_solve
from .phase_space import (ElementState, Metric, PhasePoint, ps_distance,
                          ps_norm, rescaled_coords)
from .solver import (IterationTrace, Solution, SolverConfig, init_point,
                     psi_solve)

__version__ = "0.1.0"

__all__ = [
    "BarElement", "BoundaryConditions", "BoundingLineReport", "ElementState",
    "FileFormatError", "GeometryError", "IterationTrace", "LinearLaw",
    "MaterialLaw", "Metric", "ModelingError", "NeuralLaw", "NrConfig",
    "PdMethod", "PhasePoint", "PowerLaw", "ProjectionError",
    "QuadraticPerturbedLaw", "RateEstimate", "RateFitError", "ShapeMismatchError",
    "Solution", "SolverConfig", "StiffnessFactorization", "TrussProblem",
    "WeightFile", "assemble_internal_force", "assemble_k", "assemble_tangent",
    "bounding_line_check", "build_b", "build_b_matrix", "closed_form_iterate",
    "el_cubic_coeffs", "estimate_rate", "friedrichs_rate", "generate_truss",
    "init_point", "load_problem", "load_weight_file", "nr_solve",
    "perturbed_projection", "project_d", "project_d_element", "project_e",
    "ps_distance", "ps_norm", "psi_solve", "rescaled_coords",
    "save_problem", "save_results", "serial_bars_problem",
    "single_bar_problem", "solve_el_cubic", "solve_eta", "solve_u",
    "update_stress",
]
