"""MLP fitting and weight-file export.

The network is a plain fully connected stack trained full-batch with Adam on
MSE in [0, 1]-normalized coordinates, with early stopping on a held-out
split.  Export re-evaluates the reference samples in float64 numpy on the
exact values written to disk, so any consumer that reproduces the affine
chain reproduces those outputs to machine precision.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from torch import nn


@dataclass(frozen=True)
class TrainSpec:
    """Architecture and optimization settings."""

    hidden_layers: int = 3
    hidden_width: int = 112
    learning_rate: float = 6e-5
    max_epochs: int = 10_000
    patience: int = 1_000
    validation_fraction: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if self.hidden_layers < 1 or self.hidden_width < 1:
            raise ValueError("need at least one hidden neuron")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ValueError("validation fraction must be in (0, 1)")


@dataclass
class TrainResult:
    model: nn.Sequential
    train_loss: float
    val_loss: float
    epochs_run: int
    normalization: dict = field(default_factory=dict)


class TrainingDiverged(RuntimeError):
    """Loss became non-finite."""


def _build_model(spec: TrainSpec) -> nn.Sequential:
    layers: list[nn.Module] = []
    width_in = 1
    for _ in range(spec.hidden_layers):
        layers.append(nn.Linear(width_in, spec.hidden_width))
        layers.append(nn.ReLU())
        width_in = spec.hidden_width
    layers.append(nn.Linear(width_in, 1))
    return nn.Sequential(*layers)


def parameter_count(spec: TrainSpec) -> int:
    model = _build_model(spec)
    return sum(p.numel() for p in model.parameters())


def train(points: np.ndarray, spec: TrainSpec = TrainSpec()) -> TrainResult:
    """Fit the network to (strain, stress) samples.

    Both coordinates are min-max normalized to [0, 1]; the split is a seeded
    random 80/20 partition; the best-validation weights are restored at the
    end.  Raises :class:`TrainingDiverged` on a non-finite loss.
    """
    torch.manual_seed(spec.seed)
    torch.set_num_threads(1)

    eps = points[:, 0]
    sig = points[:, 1]
    norm = {"eps_min": float(eps.min()), "eps_max": float(eps.max()),
            "sig_min": float(sig.min()), "sig_max": float(sig.max())}
    x = (eps - norm["eps_min"]) / (norm["eps_max"] - norm["eps_min"])
    y = (sig - norm["sig_min"]) / (norm["sig_max"] - norm["sig_min"])

    rng = np.random.default_rng(spec.seed)
    order = rng.permutation(len(x))
    n_val = max(1, int(round(spec.validation_fraction * len(x))))
    val_idx, train_idx = order[:n_val], order[n_val:]

    to_t = lambda a: torch.tensor(a, dtype=torch.float64).reshape(-1, 1)  # noqa: E731
    x_train, y_train = to_t(x[train_idx]), to_t(y[train_idx])
    x_val, y_val = to_t(x[val_idx]), to_t(y[val_idx])

    model = _build_model(spec).double()
    optimizer = torch.optim.Adam(model.parameters(), lr=spec.learning_rate)
    loss_fn = nn.MSELoss()

    best_val = float("inf")
    best_state = {k: v.clone() for k, v in model.state_dict().items()}
    best_train = float("inf")
    stale = 0
    epochs = 0
    for epoch in range(spec.max_epochs):
        epochs = epoch + 1
        optimizer.zero_grad()
        loss = loss_fn(model(x_train), y_train)
        loss.backward()
        optimizer.step()
        train_loss = float(loss.detach())
        if not np.isfinite(train_loss):
            raise TrainingDiverged(f"training loss became {train_loss} at "
                                   f"epoch {epochs}")
        with torch.no_grad():
            val_loss = float(loss_fn(model(x_val), y_val))
        if val_loss < best_val:
            best_val = val_loss
            best_train = train_loss
            best_state = {k: v.clone() for k, v in model.state_dict().items()}
            stale = 0
        else:
            stale += 1
            if stale >= spec.patience:
                break

    model.load_state_dict(best_state)
    return TrainResult(model=model, train_loss=best_train, val_loss=best_val,
                       epochs_run=epochs, normalization=norm)


def _layer_dump(model: nn.Sequential):
    dump = []
    linears = [m for m in model if isinstance(m, nn.Linear)]
    for i, lin in enumerate(linears):
        dump.append({
            "w": lin.weight.detach().double().numpy().tolist(),
            "b": lin.bias.detach().double().numpy().tolist(),
            "act": "linear" if i == len(linears) - 1 else "relu",
        })
    return dump


def _forward_from_dump(layers, norm, eps):
    """Re-evaluate the exported affine chain in float64 numpy."""
    x = (np.asarray(eps, dtype=float) - norm["eps_min"]) \
        / (norm["eps_max"] - norm["eps_min"])
    h = x[None, :]
    for layer in layers:
        w = np.array(layer["w"], dtype=float)
        b = np.array(layer["b"], dtype=float)
        h = w @ h + b[:, None]
        if layer["act"] == "relu":
            h = np.maximum(h, 0.0)
    return h[0] * (norm["sig_max"] - norm["sig_min"]) + norm["sig_min"]


def export_weight_file(result: TrainResult, path, y0: float,
                       n_reference: int = 100) -> dict:
    """Write the solver-facing weight file and return the document.

    ``reference`` holds (strain, stress) pairs sampled uniformly over the
    training range and evaluated on the exported values themselves, making
    the file self-checking for any independent loader.  ``noise_floor``
    bounds the network's leftover stress at zero strain.
    """
    layers = _layer_dump(result.model)
    norm = result.normalization
    ref_eps = np.linspace(norm["eps_min"], norm["eps_max"], n_reference)
    ref_sig = _forward_from_dump(layers, norm, ref_eps)
    at_zero = float(abs(_forward_from_dump(layers, norm, np.array([0.0]))[0]))
    doc = {
        "layers": layers,
        "eps_min": norm["eps_min"], "eps_max": norm["eps_max"],
        "sig_min": norm["sig_min"], "sig_max": norm["sig_max"],
        "reference": [[float(e), float(s)] for e, s in zip(ref_eps, ref_sig)],
        "y0": float(y0),
        "noise_floor": 1.5 * at_zero + 1e-12,
    }
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    return doc


def reload_reference_error(path) -> float:
    """Worst reference deviation when the file is re-read and re-evaluated,
    in normalized stress units."""
    doc = json.loads(Path(path).read_text())
    norm = {k: doc[k] for k in ("eps_min", "eps_max", "sig_min", "sig_max")}
    ref = np.array(doc["reference"], dtype=float)
    again = _forward_from_dump(doc["layers"], norm, ref[:, 0])
    return float(np.max(np.abs(again - ref[:, 1])
                        / (norm["sig_max"] - norm["sig_min"])))
