"""Command-line interface: artifacts, exit codes, error reporting."""

import csv
import json

import numpy as np
import pytest

from kdvlab.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, main
from kdvlab.grid import GridFunction, SpatialGrid
from kdvlab.soliton import SolitonConfig, eval_multisoliton


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_soliton_command(tmp_path):
    code = main(["soliton", "--betas", "1", "--out", str(tmp_path)])
    assert code == EXIT_OK
    profile = GridFunction.from_csv(tmp_path / "profile.csv")
    exact = eval_multisoliton(SolitonConfig((1.0,), (0.0,)), profile.grid)
    assert np.max(np.abs(profile.values - exact.values)) < 1e-12
    cfg = json.loads((tmp_path / "soliton_config.json").read_text())
    assert cfg["betas"] == [1.0]
    manifest = json.loads((tmp_path / "soliton_manifest.json").read_text())
    assert manifest["command"] == "soliton"


def test_soliton_time_evolution(tmp_path):
    code = main(["soliton", "--betas", "1", "--t", "1", "--out", str(tmp_path)])
    assert code == EXIT_OK
    cfg = json.loads((tmp_path / "soliton_config.json").read_text())
    assert cfg["shifts"] == pytest.approx([4.0])


def test_energy_command(tmp_path):
    code = main(["energy", "--betas", "1", "--n", "2", "--out", str(tmp_path)])
    assert code == EXIT_OK
    rows = _read_csv(tmp_path / "energies.csv")
    assert rows[0] == ["n", "value"]
    assert float(rows[1][1]) == pytest.approx(8.0 / 3.0, rel=1e-10)
    assert float(rows[2][1]) == pytest.approx(-32.0 / 5.0, rel=1e-10)


def test_energy_from_input_csv(tmp_path):
    grid = SpatialGrid(40.0, 2048)
    u = eval_multisoliton(SolitonConfig((1.0,), (0.0,)), grid)
    src = tmp_path / "input.csv"
    u.to_csv(src)
    code = main(["energy", "--input", str(src), "--n", "1", "--out", str(tmp_path)])
    assert code == EXIT_OK
    rows = _read_csv(tmp_path / "energies.csv")
    assert float(rows[1][1]) == pytest.approx(8.0 / 3.0, rel=1e-10)


def test_scatter_command(tmp_path):
    code = main(["scatter", "--betas", "1", "--kmax", "8", "--kpoints", "32",
                 "--out", str(tmp_path)])
    assert code == EXIT_OK
    rows = _read_csv(tmp_path / "scattering.csv")
    assert rows[0] == ["k", "re_a", "im_a", "log_abs_a"]
    betas = json.loads((tmp_path / "bound_states.json").read_text())
    assert betas == pytest.approx([1.0], abs=1e-6)
    resid = _read_csv(tmp_path / "trace_residuals.csv")
    assert resid[0] == ["n", "residual"]
    assert all(abs(float(r[1])) < 1e-4 for r in resid[1:])


def test_solve_command(tmp_path, capsys):
    code = main(["solve", "--e", "2.6666666666666665", "--out", str(tmp_path)])
    assert code == EXIT_OK
    stdout = capsys.readouterr().out
    report = json.loads(stdout)
    assert report["betas"][0]["value"] == pytest.approx(1.0, abs=1e-10)
    on_disk = json.loads((tmp_path / "minimizer.json").read_text())
    assert on_disk == report


def test_solve_determinism(tmp_path, capsys):
    argv = ["solve", "--e", "24", "-100", "--N", "4", "--seed", "1",
            "--out", str(tmp_path)]
    assert main(argv) == EXIT_OK
    first = capsys.readouterr().out
    assert main(argv) == EXIT_OK
    second = capsys.readouterr().out
    assert first == second


def test_phase_diagram_command(tmp_path):
    code = main(["phase-diagram", "--e1", "1", "5", "--e2", "-10", "2",
                 "--res", "4", "--out", str(tmp_path)])
    assert code == EXIT_OK
    rows = _read_csv(tmp_path / "phase_diagram.csv")
    assert rows[0] == ["e1", "e2", "region", "N_min"]
    assert len(rows) == 17


def test_validation_error_exit_code(tmp_path, capsys):
    code = main(["solve", "--out", str(tmp_path)])  # missing --e
    assert code == EXIT_VALIDATION
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["kind"] == "validation"
    assert "message" in err["error"]


def test_numerical_error_exit_code(tmp_path, capsys):
    code = main(["solve", "--e", "-1", "--out", str(tmp_path)])
    assert code == EXIT_NUMERICAL
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["kind"] == "numerical"


def test_unknown_command():
    assert main(["no-such-command"]) == EXIT_VALIDATION


def test_config_file_and_cli_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"betas": [2.0], "n": 1}))
    code = main(["energy", "--config", str(cfg), "--out", str(tmp_path)])
    assert code == EXIT_OK
    rows = _read_csv(tmp_path / "energies.csv")
    assert len(rows) == 2  # header + n=1 from the config
    assert float(rows[1][1]) == pytest.approx(8.0 / 3.0 * 2.0**3, rel=1e-10)
    # a CLI flag overrides the config value
    code = main(["energy", "--config", str(cfg), "--n", "2", "--out", str(tmp_path)])
    assert code == EXIT_OK
    rows = _read_csv(tmp_path / "energies.csv")
    assert len(rows) == 3
