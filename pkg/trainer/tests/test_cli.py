import json
import subprocess
import sys

from lawtrainer.cli import main


def test_small_pipeline_writes_valid_file(tmp_path):
    out = tmp_path / "weights.json"
    code = main(["--out", str(out), "--seed", "3", "--points", "64",
                 "--max-epochs", "40", "--patience", "40"])
    assert code == 0
    doc = json.loads(out.read_text())
    assert {"layers", "eps_min", "eps_max", "sig_min", "sig_max",
            "reference", "y0", "noise_floor"} <= set(doc)
    # consumable by the solver package's loader (dimension/schema check only;
    # a 40-epoch network is not expected to fit anything)
    check = subprocess.run([sys.executable, "-m", "psitruss.cli", "nn-check",
                            "--weights", str(out)],
                           capture_output=True, text=True)
    assert check.returncode == 0, check.stderr


def test_divergent_run_exits_nonzero(tmp_path, capsys):
    code = main(["--out", str(tmp_path / "w.json"), "--points", "64",
                 "--learning-rate", "1e160", "--max-epochs", "10",
                 "--patience", "10"])
    assert code == 1
    assert "error" in capsys.readouterr().err
