import json

import numpy as np
import pytest

from lawtrainer import (DatasetSpec, TrainSpec, TrainingDiverged, bar_law,
                        generate_dataset, parameter_count,
                        reload_reference_error, train)
from lawtrainer.training import _forward_from_dump

from conftest import GOLDEN_WEIGHTS


class TestArchitecture:
    def test_default_network_has_expected_parameter_count(self):
        assert parameter_count(TrainSpec()) == 25_649

    def test_file_reports_same_count(self, noisy_run):
        doc = noisy_run["doc"]
        count = sum(len(layer["b"]) * (len(layer["w"][0]) + 1)
                    for layer in doc["layers"])
        assert count == 25_649


class TestTrainingRun:
    def test_no_overfit(self, noisy_run):
        result = noisy_run["result"]
        assert result.val_loss <= 2.0 * result.train_loss

    def test_export_round_trips(self, noisy_run):
        assert reload_reference_error(noisy_run["path"]) <= 1e-9

    def test_reference_samples_span_the_range(self, noisy_run):
        doc = noisy_run["doc"]
        ref = np.array(doc["reference"])
        assert len(ref) == 100
        assert ref[0, 0] == doc["eps_min"]
        assert ref[-1, 0] == doc["eps_max"]

    def test_noise_floor_bounds_origin_stress(self, noisy_run):
        doc = noisy_run["doc"]
        norm = {k: doc[k] for k in ("eps_min", "eps_max", "sig_min",
                                    "sig_max")}
        at_zero = abs(_forward_from_dump(doc["layers"], norm,
                                         np.array([0.0]))[0])
        assert at_zero <= doc["noise_floor"]

    def test_schema_matches_the_shared_golden_file(self, noisy_run):
        golden = json.loads(GOLDEN_WEIGHTS.read_text())
        doc = json.loads(noisy_run["path"].read_text())
        assert set(doc) == set(golden)
        assert set(doc["layers"][0]) == set(golden["layers"][0])
        assert {layer["act"] for layer in doc["layers"]} <= {"relu", "linear"}

    def test_divergent_training_raises(self):
        pts = generate_dataset(DatasetSpec(n_points=64, seed=1))
        with pytest.raises(TrainingDiverged):
            train(pts, TrainSpec(learning_rate=1e160, max_epochs=10,
                                 patience=10, seed=1))


class TestNoiseFreeFit:
    def test_model_tracks_the_law_within_two_percent(self, noise_free_run):
        spec = noise_free_run["spec"]
        doc = noise_free_run["doc"]
        norm = {k: doc[k] for k in ("eps_min", "eps_max", "sig_min",
                                    "sig_max")}
        grid = np.linspace(-spec.eps_limit, spec.eps_limit, 2001)
        pred = _forward_from_dump(doc["layers"], norm, grid)
        law = bar_law(grid, spec.y0, spec.p)
        span = law.max() - law.min()
        assert np.max(np.abs(pred - law)) <= 0.02 * span
