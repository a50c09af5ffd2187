import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from psitruss.cli import main

from conftest import DATA_DIR


@pytest.fixture
def truss_file(tmp_path):
    path = tmp_path / "truss.json"
    assert main(["gen-truss", "--rows", "2", "--cols", "4", "--load", "-1200",
                 "--out", str(path)]) == 0
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestSolve:
    def test_psi_converges_with_exit_zero(self, tmp_path, truss_file):
        out = tmp_path / "solution.json"
        trace = tmp_path / "trace.csv"
        code = main(["solve", "--problem", str(truss_file), "--method", "psi",
                     "--out", str(out), "--trace", str(trace)])
        assert code == 0
        result = json.loads(out.read_text())
        assert result["solver"] == "psi"
        assert result["converged"] is True
        assert result["residual_rel"] < 5e-2
        rows = read_csv(trace)
        assert rows[0] == ["iter", "residual_rel", "ps_step_rel", "t_pe_ms",
                           "t_pd_ms"]
        assert len(rows) == result["iterations"] + 1

    def test_nr_method(self, tmp_path, truss_file):
        out = tmp_path / "nr.json"
        assert main(["solve", "--problem", str(truss_file), "--method", "nr",
                     "--out", str(out)]) == 0
        assert json.loads(out.read_text())["solver"] == "nr"

    def test_invalid_problem_exits_one_with_position(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({
            "nodes": [[0.0, 0.0], [1.0, 0.0]],
            "elements": [[0, 7, 1.0]],
            "material": {"type": "linear", "Y0": 1e9},
            "bcs": [], "forces": [],
        }))
        code = main(["solve", "--problem", str(bad), "--method", "psi",
                     "--out", str(tmp_path / "x.json")])
        assert code == 1
        err = capsys.readouterr().err
        assert "elements[0]" in err

    def test_max_iter_exit_code_two(self, tmp_path, truss_file):
        code = main(["solve", "--problem", str(truss_file), "--method", "psi",
                     "--tol1", "1e-12", "--tol2", "1e-13", "--max-iter", "3",
                     "--out", str(tmp_path / "x.json")])
        assert code == 2
        assert json.loads((tmp_path / "x.json").read_text())["converged"] is False

    def test_worker_count_leaves_solution_bytes_unchanged(self, tmp_path,
                                                          truss_file):
        outs = []
        for w in (1, 4):
            out = tmp_path / f"solution_w{w}.json"
            assert main(["solve", "--problem", str(truss_file), "--method",
                         "psi", "--workers", str(w), "--out", str(out)]) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_repeat_run_is_deterministic(self, tmp_path, truss_file):
        blobs = []
        for tag in ("a", "b"):
            out = tmp_path / f"solution_{tag}.json"
            main(["solve", "--problem", str(truss_file), "--method", "psi",
                  "--out", str(out)])
            blobs.append(out.read_bytes())
        assert blobs[0] == blobs[1]

    def test_plot_renders_figures(self, tmp_path, truss_file):
        out = tmp_path / "solution.json"
        assert main(["solve", "--problem", str(truss_file), "--method", "psi",
                     "--out", str(out), "--plot"]) == 0
        assert (tmp_path / "solution_residual.png").stat().st_size > 0
        assert (tmp_path / "solution_phase.png").stat().st_size > 0


class TestCompare:
    def test_linear_law_solvers_coincide(self, tmp_path):
        problem = tmp_path / "lin.json"
        main(["gen-truss", "--rows", "2", "--cols", "3", "--material",
              "linear", "--y0", "1e9", "--load", "-500", "--out",
              str(problem)])
        report = tmp_path / "report.csv"
        assert main(["compare", "--problem", str(problem), "--tol1", "1e-9",
                     "--tol2", "1e-12", "--out", str(report)]) == 0
        rows = read_csv(report)
        header, psi_row = rows[0], rows[1]
        diff = float(psi_row[header.index("u_rel_l2_diff")])
        assert diff <= 1e-8

    def test_desk_truss_report_and_timing_columns(self, tmp_path):
        problem = tmp_path / "desk.json"
        main(["gen-truss", "--rows", "3", "--cols", "8", "--load", "-500",
              "--settle", "0.002", "--out", str(problem)])
        report = tmp_path / "report.csv"
        assert main(["compare", "--problem", str(problem), "--out",
                     str(report)]) == 0
        rows = read_csv(report)
        header = rows[0]
        assert "t_pe_ms_total" in header
        assert "t_pd_ms_total" in header
        diff = float(rows[1][header.index("u_rel_l2_diff")])
        assert diff <= 0.05


class TestRate:
    def test_csv_matches_friedrichs(self, tmp_path):
        out = tmp_path / "rate.csv"
        assert main(["rate", "--y", "1", "--c", "2", "--ne", "2",
                     "--out", str(out)]) == 0
        rows = read_csv(out)
        assert rows[0] == ["n", "error", "beta_hat", "friedrichs"]
        beta = float(rows[1][2])
        fr = float(rows[1][3])
        assert fr == pytest.approx(0.8, rel=1e-12)
        assert beta == pytest.approx(fr, abs=1e-6)
        errors = np.array([float(r[1]) for r in rows[1:]])
        assert np.all(np.diff(errors) < 0)


class TestAnalyze1d:
    def test_writes_trajectory_and_checks(self, tmp_path):
        out_dir = tmp_path / "diag"
        assert main(["analyze-1d", "--law", "quadratic", "--y0", "1e9",
                     "--k", "0.02", "--f-over-a", "1e7",
                     "--out-dir", str(out_dir)]) == 0
        traj = read_csv(out_dir / "trajectory.csv")
        assert traj[0] == ["iter", "strain", "stress", "error"]
        checks = dict(r for r in read_csv(out_dir / "checks.csv")[1:])
        assert checks["ordering_preserved"] == "True"
        assert checks["dominates_line"] == "True"
        assert float(checks["expansion_abs_error"]) < 1e-6


class TestGenTruss:
    def test_written_file_loads_with_expected_counts(self, tmp_path):
        out = tmp_path / "t.json"
        assert main(["gen-truss", "--rows", "3", "--cols", "8",
                     "--out", str(out)]) == 0
        from psitruss import load_problem
        problem = load_problem(out)
        assert problem.n_nodes == 36
        assert problem.n_elements == 107

    def test_neural_material_requires_weights(self, tmp_path, capsys):
        code = main(["gen-truss", "--rows", "1", "--cols", "1", "--material",
                     "neural", "--out", str(tmp_path / "t.json")])
        assert code == 1
        assert "weights" in capsys.readouterr().err


class TestNnCheck:
    GOLDEN = str(DATA_DIR / "golden_weights.json")

    def test_valid_file_passes(self):
        assert main(["nn-check", "--weights", self.GOLDEN,
                     "--expect-params", "13"]) == 0

    def test_wrong_parameter_count_fails(self, capsys):
        assert main(["nn-check", "--weights", self.GOLDEN,
                     "--expect-params", "25649"]) == 1
        assert "parameter count" in capsys.readouterr().err

    def test_truncated_layer_fails_with_message(self, tmp_path, capsys):
        doc = json.loads((DATA_DIR / "golden_weights.json").read_text())
        doc["layers"][0]["b"] = doc["layers"][0]["b"][:-1]
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(doc))
        assert main(["nn-check", "--weights", str(bad)]) == 1
        assert "layers[0]" in capsys.readouterr().err

    def test_reference_mismatch_reports_worst_sample(self, tmp_path, capsys):
        doc = json.loads((DATA_DIR / "golden_weights.json").read_text())
        doc["reference"][4][1] += 0.5
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(doc))
        assert main(["nn-check", "--weights", str(bad)]) == 1
        err = capsys.readouterr().err
        assert "worst sample 4" in err


def test_worker_env_var_sets_default(monkeypatch):
    from psitruss.cli import build_parser
    monkeypatch.setenv("PSI_WORKERS", "3")
    args = build_parser().parse_args(["solve", "--problem", "x", "--method",
                                      "psi", "--out", "y"])
    assert args.workers == 3


def test_rate_plot_renders_figure(tmp_path):
    out = tmp_path / "rate.csv"
    assert main(["rate", "--y", "1", "--c", "1", "--out", str(out),
                 "--plot"]) == 0
    assert (tmp_path / "rate_fit.png").stat().st_size > 0


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "psitruss.cli", "rate", "--y", "1", "--c", "1",
         "--out", "/dev/null"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert "beta_hat" in proc.stdout
