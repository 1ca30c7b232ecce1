import subprocess
import sys

import numpy as np
import pytest

from qcsim.cli import main
from qcsim.state import load_state, norm


def test_qft_check(capsys):
    assert main(["qft-check", "--qubits", "6", "--samples", "3"]) == 0
    out = capsys.readouterr().out
    assert "controlled_phase=15" in out and out.strip().endswith("PASS")


def test_prepare_writes_state_and_config(tmp_path):
    out = tmp_path / "psi.txt"
    assert main(["prepare", "--l", "6", "--output", str(out)]) == 0
    s = load_state(out)
    assert abs(norm(s) - 1) < 1e-12
    cfg = (tmp_path / "psi.txt.config").read_text().splitlines()
    keys = [ln.split("=")[0] for ln in cfg]
    assert keys == sorted(keys)
    assert "dt" in keys and "l=6" in cfg


def test_evolve_zero_steps_byte_identical(tmp_path):
    a = tmp_path / "a.txt"
    b = tmp_path / "b.txt"
    assert main(["prepare", "--l", "5", "--output", str(a)]) == 0
    assert main(["evolve", "--l", "5", "--input", str(a), "--steps", "0", "--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_evolve_from_prepared_target(tmp_path):
    out = tmp_path / "e.txt"
    assert main(["evolve", "--l", "5", "--target", "plane_wave", "--k", "2", "--steps", "3", "--potential", "free",
                 "--output", str(out)]) == 0
    probs = np.abs(load_state(out).amplitudes) ** 2
    assert np.allclose(probs, 1 / 32, atol=1e-9)


def test_spectrum_reproducible(tmp_path):
    args = ["spectrum", "--l", "6", "--p", "8", "--coupling", "100", "--bounds", "0,2.5",
            "--shots", "200", "--seed", "7"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--output", str(a)]) == 0
    assert main(args + ["--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    rows = [ln.split(",") for ln in a.read_text().splitlines()[1:]]
    assert sum(int(r[1]) for r in rows) == 200
    estimates = {round(float(r[2]), 1) for r in rows if int(r[1]) > 20}
    assert estimates == {0.5, 1.5}


def test_cool_outputs(tmp_path):
    out = tmp_path / "cool.csv"
    assert main(["cool", "--l", "5", "--cycles", "3", "--output", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "# cycle,energy,coupling,outcomes"
    assert len(lines) == 4
    assert (tmp_path / "cool.csv.state").exists()
    assert "E0=" in (tmp_path / "cool.csv.config").read_text()


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nl=5\nsteps=2\n")
    out = tmp_path / "o.txt"
    assert main(["evolve", "--config", str(cfg), "--steps", "0", "--output", str(out)]) == 0
    echo = (tmp_path / "o.txt.config").read_text()
    assert "l=5" in echo.splitlines() and "steps=0" in echo.splitlines()


def test_config_errors_listed(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("l=five\nbogus=1\n")
    assert main(["prepare", "--config", str(cfg)]) == 2
    err = capsys.readouterr().err
    assert "'l'" in err and "'bogus'" in err
    assert len(err.strip().splitlines()) == 1


def test_even_A_reported(capsys):
    assert main(["evolve", "--l", "4", "--A", "2"]) == 2
    assert "not be unitary" in capsys.readouterr().err


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "qcsim", "qft-check", "--qubits", "3", "--samples", "1"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "PASS" in r.stdout
