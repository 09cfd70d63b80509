import json
import subprocess
import sys

import numpy as np
import pytest

from vqe_plateaus import __version__
from vqe_plateaus.cli import main


@pytest.fixture
def out(tmp_path, monkeypatch):
    monkeypatch.delenv("VQE_PLATEAUS_OUTPUT", raising=False)
    return tmp_path / "out"


def test_ground_state_of_two_site_ising(out, capsys):
    assert main(["ground-state", "--hamiltonian", "tfim_2", "--output", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert "ground energy: -2.236067977" in stdout
    state = np.load(out / "tfim_2_ground_state.npy")
    assert np.linalg.norm(state) == pytest.approx(1.0)


def test_ground_state_text_format(out):
    assert main(["ground-state", "--hamiltonian", "h2", "--state-format", "txt", "--output", str(out)]) == 0
    data = np.loadtxt(out / "h2_ground_state.txt")
    assert data.shape == (16, 2)


def test_missing_hamiltonian_file(out, capsys):
    code = main(["ground-state", "--hamiltonian", str(out / "nope.txt"), "--output", str(out)])
    assert code == 2
    assert "file not found" in capsys.readouterr().err


def test_invalid_method_lists_valid_ones(out, capsys):
    code = main(["run", "--method", "qaoa", "--hamiltonian", "h2", "--output", str(out)])
    assert code == 2
    err = capsys.readouterr().err
    assert "invalid method" in err and "sea" in err


def test_unknown_flag_is_a_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["run", "--bogus"])
    assert info.value.code == 2


def test_run_with_zero_iterations(out, capsys):
    args = ["run", "--method", "sea", "--hamiltonian", "tfim_2", "--layers", "1", "--iterations", "0",
            "--output", str(out)]
    assert main(args) == 0
    assert "short trace" in capsys.readouterr().out
    record = json.loads((out / "tfim_2_sea_1L_42.json").read_text())
    assert record["iterations"] == 0


def test_rerun_writes_identical_files(out):
    args = ["run", "--method", "adiabatic", "--hamiltonian", "h2", "--layers", "1", "--iterations", "25",
            "--output", str(out)]
    assert main(args) == 0
    first = {p.name: p.read_bytes() for p in out.iterdir()}
    assert main(args) == 0
    assert {p.name: p.read_bytes() for p in out.iterdir()} == first
    assert set(first) == {"h2_adiabatic_1L_42.json", "h2_adiabatic_1L_42.csv"}


def test_output_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("VQE_PLATEAUS_OUTPUT", str(tmp_path / "env"))
    assert main(["ground-state", "--hamiltonian", "tfim_2"]) == 0
    assert (tmp_path / "env" / "tfim_2_ground_state.npy").exists()


def test_grad_scan_low_sample_warning_and_outputs(out, capsys):
    args = ["grad-scan", "--method", "sea", "--hamiltonian", "tfim_4", "--depths", "1,50", "--samples", "2",
            "--output", str(out)]
    assert main(args) == 0
    captured = capsys.readouterr()
    assert "warning" in captured.err
    assert "variance ratio" in captured.out
    lines = (out / "tfim_4_sea_gradients_42.csv").read_text().splitlines()
    assert lines[0] == "depth,mean_norm,variance,n_samples"
    assert [line.split(",")[0] for line in lines[1:]] == ["1", "50"]
    assert (out / "tfim_4_sea_gradients_42.png").exists()


def test_grad_scan_rejects_bad_depths(out, capsys):
    code = main(["grad-scan", "--method", "sea", "--hamiltonian", "h2", "--depths", "1,0", "--output", str(out)])
    assert code == 2


def test_grad_scan_on_identity_is_a_numerical_error(tmp_path, out, capsys):
    path = tmp_path / "identity.txt"
    path.write_text("1.5 III\n")
    code = main(["grad-scan", "--method", "standard", "--hamiltonian", str(path), "--depths", "1,2",
                 "--samples", "3", "--no-figure", "--output", str(out)])
    assert code == 1
    assert "error" in capsys.readouterr().err


def test_landscape_small_grid(out, capsys):
    args = ["landscape", "--method", "standard", "--hamiltonian", "tfim_2", "--layers", "1",
            "--resolution", "3", "--output", str(out)]
    assert main(args) == 0
    assert "centre check ok" in capsys.readouterr().out
    rows = (out / "tfim_2_standard_landscape.csv").read_text().splitlines()
    assert rows[0] == "i,j,x,y,energy" and len(rows) == 10
    assert (out / "tfim_2_standard_landscape.png").exists()


def test_landscape_centred_on_a_run_result(out, capsys):
    assert main(["run", "--method", "sea", "--hamiltonian", "h2", "--layers", "2", "--iterations", "10",
                 "--output", str(out)]) == 0
    record = out / "h2_sea_2L_42.json"
    assert main(["landscape", "--method", "sea", "--hamiltonian", "h2", "--center", str(record),
                 "--resolution", "4", "--no-figure", "--output", str(out)]) == 0
    assert "centre check ok" in capsys.readouterr().out


def test_landscape_dimension_mismatch(tmp_path, out, capsys):
    vec = tmp_path / "theta.npy"
    np.save(vec, np.zeros(5))
    code = main(["landscape", "--method", "standard", "--hamiltonian", "tfim_2", "--layers", "1",
                 "--center", str(vec), "--output", str(out)])
    assert code == 2
    assert "parameters" in capsys.readouterr().err


def test_landscape_zero_range_warns(out, capsys):
    args = ["landscape", "--method", "standard", "--hamiltonian", "tfim_2", "--layers", "1", "--range", "0",
            "--resolution", "2", "--no-figure", "--output", str(out)]
    assert main(args) == 0
    assert "warning" in capsys.readouterr().err


def test_config_file_precedence(tmp_path, out):
    cfg = tmp_path / "opts.json"
    cfg.write_text(json.dumps({"method": "sea", "hamiltonian": "tfim_2", "layers": 1, "iterations": 3, "seed": 7}))
    assert main(["run", "--config", str(cfg), "--seed", "8", "--output", str(out)]) == 0
    record = json.loads((out / "tfim_2_sea_1L_8.json").read_text())
    assert record["iterations"] == 3
    cfg.write_text(json.dumps({"method": "sea", "flavour": 1}))
    assert main(["run", "--config", str(cfg), "--output", str(out)]) == 2


def test_campaign_and_report(tmp_path, out, capsys):
    cfg = tmp_path / "campaign.json"
    cfg.write_text(json.dumps({"hamiltonians": ["tfim_2"], "methods": ["sea"], "layers": 1, "depths": [1, 2],
                               "iterations": 5, "samples": 3, "output": str(out)}))
    assert main(["campaign", "--config", str(cfg), "--jobs", "1"]) == 0
    assert "1 rows" in capsys.readouterr().out
    assert main(["report", "--config", str(cfg), "--no-figure"]) == 0
    assert "== variance_scaling.txt" in capsys.readouterr().out
    assert main(["campaign"]) == 2


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert capsys.readouterr().out.startswith(f"vqe-plateaus {__version__} (rng: numpy.Philox")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "vqe_plateaus", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for command in ("ground-state", "run", "grad-scan", "landscape", "campaign", "report"):
        assert command in proc.stdout
