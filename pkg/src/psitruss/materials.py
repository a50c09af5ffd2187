"""Scalar constitutive laws sigma = m(eps) behind one interface.

Every law is immutable, vectorized over numpy arrays, and stress-free at the
origin.  ``tangent`` is analytic where the law allows it; the MLP-backed law
falls back to central finite differences (its ReLU graph is piecewise linear,
so a true gradient would be ill-defined at the kinks anyway — and the
alternating-projection solver never asks for one).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FileFormatError

# Central finite-difference step used by tangent checks and the MLP tangent.
FD_STEP_SCALE = 1e-7


def _fd_tangent(stress_fn, eps, scale=FD_STEP_SCALE):
    h = scale * max(1.0, abs(float(eps)))
    return (stress_fn(eps + h) - stress_fn(eps - h)) / (2.0 * h)


class MaterialLaw:
    """Interface: ``stress(eps)``, ``tangent(eps)``, ``zero_strain_modulus()``.

    ``tangent_is_exact`` tells root-based projection methods whether the
    tangent can be trusted for Newton/secant iterations.
    """

    tangent_is_exact = True

    def stress(self, eps):
        raise NotImplementedError

    def tangent(self, eps):
        raise NotImplementedError

    def zero_strain_modulus(self) -> float:
        raise NotImplementedError

    def __call__(self, eps):
        return self.stress(eps)


@dataclass(frozen=True)
class LinearLaw(MaterialLaw):
    """sigma = Y * eps."""

    y: float

    def __post_init__(self):
        if self.y <= 0:
            raise ValueError(f"modulus must be > 0, got {self.y}")

    def stress(self, eps):
        return self.y * np.asarray(eps, dtype=float) if np.ndim(eps) else self.y * float(eps)

    def tangent(self, eps):
        return np.full_like(np.asarray(eps, dtype=float), self.y) if np.ndim(eps) else self.y

    def zero_strain_modulus(self) -> float:
        return self.y


@dataclass(frozen=True)
class QuadraticPerturbedLaw(MaterialLaw):
    """sigma = Y * (eps - k * eps^2); reduces to :class:`LinearLaw` at k = 0.

    ``k`` must be small and non-negative: the quadratic term is a weak
    concave perturbation of the linear law.
    """

    y: float
    k: float

    def __post_init__(self):
        if self.y <= 0:
            raise ValueError(f"modulus must be > 0, got {self.y}")
        if self.k < 0:
            raise ValueError(f"perturbation parameter must be >= 0, got {self.k}")

    def stress(self, eps):
        e = np.asarray(eps, dtype=float) if np.ndim(eps) else float(eps)
        return self.y * (e - self.k * e * e)

    def tangent(self, eps):
        e = np.asarray(eps, dtype=float) if np.ndim(eps) else float(eps)
        return self.y * (1.0 - 2.0 * self.k * e)

    def zero_strain_modulus(self) -> float:
        return self.y


@dataclass(frozen=True)
class PowerLaw(MaterialLaw):
    """sigma = Y0 * [ (|eps| + c)^p - c^p ] * sign(eps), with c = p^(1/(1-p)).

    ``c`` is chosen so the tangent at the origin is exactly ``Y0``.  The
    exponent ``p`` in (0, 1) controls how quickly the response softens: the
    smaller ``p``, the harder the nonlinearity bites.
    """

    y0: float
    p: float
    c: float = field(init=False)

    def __post_init__(self):
        if self.y0 <= 0:
            raise ValueError(f"zero-strain modulus must be > 0, got {self.y0}")
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"exponent must lie in (0, 1), got {self.p}")
        object.__setattr__(self, "c", self.p ** (1.0 / (1.0 - self.p)))

    def stress(self, eps):
        e = np.asarray(eps, dtype=float)
        # (|e|+c)^p - c^p = c^p expm1(p log1p(|e|/c)): same value, but free of
        # the cancellation between two pow() results that both sit near 1.
        diff = self.c**self.p * np.expm1(self.p * np.log1p(np.abs(e) / self.c))
        s = self.y0 * diff * np.sign(e)
        return s if np.ndim(eps) else float(s)

    def tangent(self, eps):
        e = np.asarray(eps, dtype=float)
        t = self.y0 * self.p * (np.abs(e) + self.c) ** (self.p - 1.0)
        return t if np.ndim(eps) else float(t)

    def zero_strain_modulus(self) -> float:
        return self.y0


_ACTIVATIONS = ("relu", "linear")


@dataclass(frozen=True)
class NeuralLaw(MaterialLaw):
    """Feed-forward MLP constitutive law loaded from an exported weight file.

    The network maps strain normalized to [0, 1] through affine layers with
    relu/linear activations and de-normalizes the output back to Pa.  The
    tangent is a finite difference of the forward pass and is *not* exposed
    to root-based projection methods.

    ``declared_y0`` is the zero-strain modulus of the law the network was
    fitted to, when the exporter recorded it; otherwise the modulus is
    estimated by a secant through the middle of the training range (a noisy
    network cannot be trusted pointwise at the origin).
    """

    weights: tuple          # tuple of (W, b) with W shape (out, in)
    activations: tuple      # "relu" / "linear" per layer
    eps_min: float
    eps_max: float
    sig_min: float
    sig_max: float
    declared_y0: float | None = None
    noise_floor: float | None = None

    tangent_is_exact = False

    def __post_init__(self):
        if len(self.weights) != len(self.activations):
            raise ValueError("one activation per layer is required")
        if self.eps_max <= self.eps_min or self.sig_max <= self.sig_min:
            raise ValueError("normalization ranges must have positive width")

    @property
    def parameter_count(self) -> int:
        return sum(w.size + b.size for w, b in self.weights)

    def _forward_normalized(self, x_norm: np.ndarray) -> np.ndarray:
        h = x_norm[None, :]
        for (w, b), act in zip(self.weights, self.activations):
            h = w @ h + b[:, None]
            if act == "relu":
                h = np.maximum(h, 0.0)
        return h[0]

    def stress(self, eps):
        e = np.atleast_1d(np.asarray(eps, dtype=float))
        x = (e - self.eps_min) / (self.eps_max - self.eps_min)
        y = self._forward_normalized(x)
        s = y * (self.sig_max - self.sig_min) + self.sig_min
        return s if np.ndim(eps) else float(s[0])

    def tangent(self, eps):
        if np.ndim(eps):
            return np.array([_fd_tangent(self.stress, e) for e in np.asarray(eps)])
        return _fd_tangent(self.stress, float(eps))

    def zero_strain_modulus(self) -> float:
        if self.declared_y0 is not None:
            return self.declared_y0
        d = (self.eps_max - self.eps_min) / 200.0
        return (self.stress(d) - self.stress(-d)) / (2.0 * d)


@dataclass(frozen=True)
class WeightFile:
    """Parsed MLP weight file: the law plus its embedded reference samples."""

    law: NeuralLaw
    reference: np.ndarray  # shape (n, 2): (strain, stress) pairs
    path: str

    @property
    def parameter_count(self) -> int:
        return self.law.parameter_count


def _require(cond, msg, path, location=None):
    if not cond:
        raise FileFormatError(msg, path=path, location=location)


def load_weight_file(path) -> WeightFile:
    """Load and validate an exported MLP weight file.

    Layout (JSON): ``layers`` is a list of ``{"w": [[...]], "b": [...],
    "act": "relu"|"linear"}`` with ``w`` row-major (rows = output width),
    plus ``eps_min/eps_max/sig_min/sig_max`` normalization constants and
    ``reference``, a list of [strain, stress] pairs produced by the exporter
    for cross-implementation checks.  Optional keys: ``y0`` (zero-strain
    modulus of the generating law) and ``noise_floor`` (Pa, bound on
    |stress(0)| for a network fitted to noisy data).
    """
    path = str(path)
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FileFormatError(f"cannot read weight file: {exc}", path=path) from exc
    _require(isinstance(raw, dict), "top level must be an object", path)
    for key in ("layers", "eps_min", "eps_max", "sig_min", "sig_max", "reference"):
        _require(key in raw, f"missing required key {key!r}", path)
    layers = raw["layers"]
    _require(isinstance(layers, list) and layers, "layers must be a non-empty list", path)

    weights, acts = [], []
    width = 1
    for i, layer in enumerate(layers):
        loc = f"layers[{i}]"
        _require(isinstance(layer, dict), "layer must be an object", path, loc)
        for key in ("w", "b", "act"):
            _require(key in layer, f"missing {key!r}", path, loc)
        _require(layer["act"] in _ACTIVATIONS,
                 f"unknown activation {layer['act']!r}", path, loc)
        try:
            w = np.array(layer["w"], dtype=float)
            b = np.array(layer["b"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise FileFormatError(f"non-numeric weights: {exc}", path=path,
                                  location=loc) from exc
        _require(w.ndim == 2, f"w must be a matrix, got ndim={w.ndim}", path, loc)
        _require(b.ndim == 1 and b.size == w.shape[0],
                 f"b length {b.size} does not match {w.shape[0]} output rows", path, loc)
        _require(w.shape[1] == width,
                 f"input width {w.shape[1]} does not chain with previous width {width}",
                 path, loc)
        _require(np.all(np.isfinite(w)) and np.all(np.isfinite(b)),
                 "weights must be finite", path, loc)
        w.flags.writeable = False
        b.flags.writeable = False
        weights.append((w, b))
        acts.append(layer["act"])
        width = w.shape[0]
    _require(width == 1, f"last layer must have output width 1, got {width}", path,
             f"layers[{len(layers) - 1}]")

    consts = {}
    for key in ("eps_min", "eps_max", "sig_min", "sig_max"):
        v = raw[key]
        _require(isinstance(v, (int, float)) and np.isfinite(v),
                 f"{key} must be a finite number", path)
        consts[key] = float(v)
    _require(consts["eps_max"] > consts["eps_min"], "eps_max must exceed eps_min", path)
    _require(consts["sig_max"] > consts["sig_min"], "sig_max must exceed sig_min", path)

    reference = np.array(raw["reference"], dtype=float)
    _require(reference.ndim == 2 and reference.shape[1] == 2,
             "reference must be a list of [strain, stress] pairs", path)
    _require(np.all(np.isfinite(reference)), "reference values must be finite", path)
    reference.flags.writeable = False

    y0 = raw.get("y0")
    if y0 is not None:
        _require(isinstance(y0, (int, float)) and y0 > 0, "y0 must be > 0", path)
        y0 = float(y0)
    noise_floor = raw.get("noise_floor")
    if noise_floor is not None:
        _require(isinstance(noise_floor, (int, float)) and noise_floor >= 0,
                 "noise_floor must be >= 0", path)
        noise_floor = float(noise_floor)

    law = NeuralLaw(
        weights=tuple(weights),
        activations=tuple(acts),
        declared_y0=y0,
        noise_floor=noise_floor,
        **consts,
    )
    return WeightFile(law=law, reference=reference, path=path)


def law_from_spec(spec: dict, base_dir=None) -> MaterialLaw:
    """Build a law from the ``material`` block of a problem file."""
    if not isinstance(spec, dict) or "type" not in spec:
        raise FileFormatError("material must be an object with a 'type' key",
                              location="material")
    kind = spec["type"]
    try:
        if kind == "linear":
            return LinearLaw(y=float(spec["Y0"]))
        if kind == "power":
            return PowerLaw(y0=float(spec["Y0"]), p=float(spec["p"]))
        if kind == "quadratic":
            return QuadraticPerturbedLaw(y=float(spec["Y0"]), k=float(spec["k"]))
        if kind == "neural":
            wpath = Path(spec["weights_path"])
            if base_dir is not None and not wpath.is_absolute():
                wpath = Path(base_dir) / wpath
            return load_weight_file(wpath).law
    except KeyError as exc:
        raise FileFormatError(f"material type {kind!r} requires key {exc}",
                              location="material") from exc
    except ValueError as exc:
        raise FileFormatError(str(exc), location="material") from exc
    raise FileFormatError(f"unknown material type {kind!r}", location="material")


def law_to_spec(law: MaterialLaw, weights_path=None) -> dict:
    """Inverse of :func:`law_from_spec` for the analytic laws."""
    if isinstance(law, LinearLaw):
        return {"type": "linear", "Y0": law.y}
    if isinstance(law, PowerLaw):
        return {"type": "power", "Y0": law.y0, "p": law.p}
    if isinstance(law, QuadraticPerturbedLaw):
        return {"type": "quadratic", "Y0": law.y, "k": law.k}
    if isinstance(law, NeuralLaw):
        if weights_path is None:
            raise ValueError("a weights_path is required to describe a neural law")
        return {"type": "neural", "weights_path": str(weights_path)}
    raise TypeError(f"cannot serialize law of type {type(law).__name__}")
