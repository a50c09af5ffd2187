"""Phase-space points and the metric induced by the distance constant.

The state of a discretized truss is a point whose coordinates are the axial
strain and stress of every bar.  Distances weight the two coordinate families
by a positive constant ``C`` (units Pa) and by the element volumes, so that
strain and stress contributions are commensurable:

    ||z||^2 = sum_e w_e * [ C * eps_e^2 / 2  +  sig_e^2 / (2 C) ]

Both projections of the solver minimize this distance, so everything here is
deliberately tiny and allocation-light.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .errors import ShapeMismatchError


class ElementState(NamedTuple):
    """Axial (strain, stress) pair of a single bar."""

    strain: float
    stress: float


@dataclass(frozen=True)
class Metric:
    """Weighted phase-space metric: distance constant ``c`` (Pa) and element
    volumes (m^3).  Positive-definiteness requires both strictly positive."""

    c: float
    volumes: np.ndarray

    def __post_init__(self):
        vols = np.asarray(self.volumes, dtype=float)
        object.__setattr__(self, "volumes", vols)
        if not np.isfinite(self.c) or self.c <= 0.0:
            raise ValueError(f"distance constant must be finite and > 0, got {self.c}")
        if vols.ndim != 1 or vols.size == 0:
            raise ValueError("volumes must be a non-empty 1-D array")
        if not np.all(np.isfinite(vols)) or np.any(vols <= 0.0):
            raise ValueError("all element volumes must be finite and > 0")

    @property
    def n_elements(self) -> int:
        return self.volumes.size


class PhasePoint:
    """Per-element (strain, stress) states of the whole mesh.

    Immutable: the arrays are copied on construction and marked read-only.
    The element count is fixed for the lifetime of the point.
    """

    __slots__ = ("strain", "stress")

    def __init__(self, strain, stress):
        strain = np.array(strain, dtype=float)
        stress = np.array(stress, dtype=float)
        if strain.shape != stress.shape or strain.ndim != 1:
            raise ShapeMismatchError(
                f"strain/stress shapes disagree: {strain.shape} vs {stress.shape}"
            )
        strain.flags.writeable = False
        stress.flags.writeable = False
        object.__setattr__(self, "strain", strain)
        object.__setattr__(self, "stress", stress)

    def __setattr__(self, name, value):
        raise AttributeError("PhasePoint is immutable")

    @classmethod
    def zeros(cls, n_elements: int) -> "PhasePoint":
        return cls(np.zeros(n_elements), np.zeros(n_elements))

    @property
    def n_elements(self) -> int:
        return self.strain.size

    def state(self, e: int) -> ElementState:
        return ElementState(float(self.strain[e]), float(self.stress[e]))

    def __iter__(self) -> Iterator[ElementState]:
        for e in range(self.n_elements):
            yield self.state(e)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.strain)) and np.all(np.isfinite(self.stress)))

    def __repr__(self):
        return f"PhasePoint(n_elements={self.n_elements})"


def _check_lengths(n: int, metric: Metric):
    if n != metric.n_elements:
        raise ShapeMismatchError(
            f"point has {n} elements but metric has {metric.n_elements} volumes"
        )


def ps_norm(z: PhasePoint, metric: Metric) -> float:
    """Weighted phase-space norm; zero iff ``z`` is the origin."""
    _check_lengths(z.n_elements, metric)
    c = metric.c
    quad = metric.volumes * (c * z.strain**2 + z.stress**2 / c)
    return float(np.sqrt(0.5 * np.sum(quad)))


def ps_distance(z1: PhasePoint, z2: PhasePoint, metric: Metric) -> float:
    """Distance induced by :func:`ps_norm`; symmetric, triangle inequality."""
    if z1.n_elements != z2.n_elements:
        raise ShapeMismatchError(
            f"points have different lengths: {z1.n_elements} vs {z2.n_elements}"
        )
    _check_lengths(z1.n_elements, metric)
    c = metric.c
    de = z1.strain - z2.strain
    ds = z1.stress - z2.stress
    quad = metric.volumes * (c * de**2 + ds**2 / c)
    return float(np.sqrt(0.5 * np.sum(quad)))


def rescaled_coords(z: PhasePoint, metric: Metric) -> np.ndarray:
    """Coordinates in which the metric is the plain Euclidean norm.

    Returns the length-2*N_e vector (sqrt(w C / 2) * eps, sqrt(w / (2 C)) * sig).
    Computed on demand and never persisted: the raw (strain, stress) pairs
    stay in physical units everywhere else.
    """
    _check_lengths(z.n_elements, metric)
    w = metric.volumes
    c = metric.c
    return np.concatenate(
        [np.sqrt(0.5 * w * c) * z.strain, np.sqrt(0.5 * w / c) * z.stress]
    )
