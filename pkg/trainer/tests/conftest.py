from pathlib import Path

import pytest

from lawtrainer import (DatasetSpec, TrainSpec, export_weight_file,
                        generate_dataset, train)

# Golden weight file shared with the solver package's test data.
GOLDEN_WEIGHTS = Path(__file__).parents[2] / "tests" / "data" / "golden_weights.json"

# PASS/FAIL lines appended by the acceptance test, echoed after the run.
acceptance_lines = []


def pytest_terminal_summary(terminalreporter):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def noisy_run(tmp_path_factory):
    """One full noisy pipeline run, shared across the suite (training is the
    expensive part)."""
    spec = DatasetSpec(seed=0)
    points = generate_dataset(spec)
    result = train(points, TrainSpec(seed=0))
    path = tmp_path_factory.mktemp("export") / "weights.json"
    doc = export_weight_file(result, path, y0=spec.y0)
    return {"spec": spec, "points": points, "result": result, "doc": doc,
            "path": path}


@pytest.fixture(scope="session")
def noise_free_run(tmp_path_factory):
    """Noise-free variant: longer patience, same architecture."""
    spec = DatasetSpec(noise=False, seed=0)
    points = generate_dataset(spec)
    result = train(points, TrainSpec(seed=0, patience=5_000))
    path = tmp_path_factory.mktemp("export_clean") / "weights.json"
    doc = export_weight_file(result, path, y0=spec.y0)
    return {"spec": spec, "points": points, "result": result, "doc": doc,
            "path": path}
