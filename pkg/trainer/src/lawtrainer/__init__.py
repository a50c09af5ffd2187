"""Offline constitutive-surrogate pipeline: dataset generation, MLP
training, and weight-file export for the truss solver."""

from .dataset import DatasetSpec, bar_law, generate_dataset, rescaled_arc_lengths
from .training import (TrainResult, TrainSpec, TrainingDiverged,
                       export_weight_file, parameter_count,
                       reload_reference_error, train)

__all__ = [
    "DatasetSpec", "TrainResult", "TrainSpec", "TrainingDiverged", "bar_law",
    "export_weight_file", "generate_dataset", "parameter_count",
    "reload_reference_error", "rescaled_arc_lengths", "train",
]
