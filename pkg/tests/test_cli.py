"""Tests for the batch front-end: subcommands, config layering, exit codes,
artifact determinism, and manifest completeness.

Everything runs in-process through main(argv) against tmp_path output
directories; one subprocess smoke test covers module execution.  Numeric
expectations reuse oracles established in the solver test modules (the
shooting value u0 = 1.80500 at kappa^2 = 8, gamma = 0.1, and the constant
state energy kappa^2 * pi * R^2).
"""

import json
import subprocess
import sys

import numpy as np

from spheremin.cli import EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, main
from spheremin.io import read_field_bin, sha256_file


def _manifest_checks(outdir):
    """Every artifact listed exists with matching size and checksum."""
    manifest = json.loads((outdir / "manifest.json").read_text())
    assert manifest["artifacts"], "manifest lists no artifacts"
    for entry in manifest["artifacts"]:
        path = outdir / entry["path"]
        assert path.is_file()
        assert entry["bytes"] == path.stat().st_size
        assert entry["sha256"] == sha256_file(path)
    return manifest


def test_radial_subcommand_reproduces_shooting_oracle(tmp_path):
    out = tmp_path / "run"
    rc = main(["radial", "--disk", "1", "--N", "2", "--kappa2", "8",
               "--gamma", "0.1", "--out", str(out)])
    assert rc == EXIT_OK
    report = json.loads((out / "report.json").read_text())
    assert report["classification"] == "nonconstant"
    assert abs(report["u0"] - 1.8049953859) < 1e-4
    assert report["monotone"] is True
    assert abs(report["closure"]) < 1e-8
    assert (out / "profile.csv").is_file()
    manifest = _manifest_checks(out)
    listed = {e["path"] for e in manifest["artifacts"]}
    assert listed == {"profile.csv", "report.json"}


def test_radial_ball_radius_alias(tmp_path):
    # --R is an alias for --disk; the two spellings give identical output
    out_r = tmp_path / "alias"
    out_d = tmp_path / "plain"
    args = ["--N", "2", "--kappa2", "5", "--gamma", "0.1"]
    assert main(["radial", "--R", "1", *args, "--out", str(out_r)]) == EXIT_OK
    assert main(["radial", "--disk", "1", *args,
                 "--out", str(out_d)]) == EXIT_OK
    assert ((out_r / "profile.csv").read_bytes()
            == (out_d / "profile.csv").read_bytes())
    report = json.loads((out_r / "report.json").read_text())
    assert report["classification"] == "constant-e3"


def test_constants_subcommand_unit_disk(tmp_path, capsys):
    out = tmp_path / "run"
    rc = main(["constants", "--disk", "1", "--mesh", "12", "24",
               "--gamma", "1", "--out", str(out)])
    assert rc == EXIT_OK
    data = json.loads((out / "constants.json").read_text())
    assert data["c_omega"] == 1.0
    assert data["kappa_gamma"] == 0.5
    assert data["delta_gamma"] == 0.5
    assert abs(data["gamma_kappa"] - 1.0 / data["c_trace"]) < 1e-15
    assert data["mesh"]["kind"] == "disk-polar"
    assert "kappa_gamma" in capsys.readouterr().out


def test_solve2d_writes_field_artifacts_and_report(tmp_path):
    out = tmp_path / "run"
    rc = main(["solve2d", "--disk", "1", "--mesh", "12", "24",
               "--kappa", "0.3", "--gamma", "1", "--out", str(out)])
    assert rc == EXIT_OK
    field = read_field_bin(out / "field.bin")
    assert field.shape == (12 * 24 + 1, 3)
    assert np.max(np.abs(np.linalg.norm(field, axis=1) - 1.0)) < 1e-12
    report = json.loads((out / "report.json").read_text())
    assert report["report"]["converged"] is True
    assert report["report"]["classification"] == "constant-e3"
    assert abs(report["report"]["energy"]["total"] - 0.09 * np.pi) < 1e-3
    assert (out / "field.csv").is_file()
    _manifest_checks(out)


def test_solve2d_rejects_negative_gamma_without_output(tmp_path, capsys):
    out = tmp_path / "never"
    rc = main(["solve2d", "--disk", "1", "--gamma", "-1", "--out", str(out)])
    assert rc == EXIT_CONFIG
    assert not out.exists()
    assert "gamma" in capsys.readouterr().err


def test_solve2d_nonconvergence_exits_3(tmp_path):
    out = tmp_path / "run"
    rc = main(["solve2d", "--disk", "1", "--mesh", "12", "24",
               "--kappa", "0.3", "--gamma", "1", "--max-iterations", "1",
               "--out", str(out)])
    assert rc == EXIT_SOLVER
    report = json.loads((out / "report.json").read_text())
    assert report["report"]["converged"] is False


def test_solve2d_same_seed_byte_identical_artifacts(tmp_path):
    args = ["solve2d", "--disk", "1", "--mesh", "12", "24", "--kappa", "0.3",
            "--gamma", "1", "--seed", "4"]
    out1, out2 = tmp_path / "one", tmp_path / "two"
    assert main(args + ["--out", str(out1)]) == EXIT_OK
    assert main(args + ["--out", str(out2)]) == EXIT_OK
    assert (out1 / "field.csv").read_bytes() == (out2 / "field.csv").read_bytes()
    assert (out1 / "field.bin").read_bytes() == (out2 / "field.bin").read_bytes()


def test_kappa2_overrides_kappa_with_warning(tmp_path, capsys):
    out = tmp_path / "run"
    rc = main(["radial", "--disk", "1", "--kappa", "1", "--kappa2", "8",
               "--gamma", "0.1", "--out", str(out)])
    assert rc == EXIT_OK
    assert "overrides" in capsys.readouterr().err
    report = json.loads((out / "report.json").read_text())
    assert abs(report["kappa"] - np.sqrt(8.0)) < 1e-15


def test_toml_config_with_flag_override(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text(
        '[domain]\nkind = "disk"\nradius = 1.0\nnr = 12\nntheta = 24\n'
        "[params]\nkappa = 0.3\ngamma = 1.0\n")
    out = tmp_path / "run"
    rc = main(["solve2d", "--config", str(cfg), "--gamma", "2.0",
               "--out", str(out)])
    assert rc == EXIT_OK
    report = json.loads((out / "report.json").read_text())
    assert report["kappa"] == 0.3          # from the file
    assert report["gamma"] == 2.0          # flag wins over the file
    assert report["mesh"]["shape"] == [12, 24]


def test_toml_config_accepts_squared_anisotropy_key(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text("[params]\nkappa2 = 8.0\ngamma = 0.1\n")
    out = tmp_path / "run"
    rc = main(["radial", "--disk", "1", "--config", str(cfg),
               "--out", str(out)])
    assert rc == EXIT_OK
    report = json.loads((out / "report.json").read_text())
    assert abs(report["kappa"] - np.sqrt(8.0)) < 1e-15


def test_bad_configs_exit_2(tmp_path, capsys):
    table = tmp_path / "table.toml"
    table.write_text("[bogus]\nx = 1\n")
    assert main(["radial", "--disk", "1", "--config", str(table),
                 "--out", str(tmp_path / "a")]) == EXIT_CONFIG
    key = tmp_path / "key.toml"
    key.write_text("[params]\nnonsense = 1\n")
    assert main(["radial", "--disk", "1", "--config", str(key),
                 "--out", str(tmp_path / "b")]) == EXIT_CONFIG
    broken = tmp_path / "broken.toml"
    broken.write_text("not = [toml\n")
    assert main(["radial", "--disk", "1", "--config", str(broken),
                 "--out", str(tmp_path / "c")]) == EXIT_CONFIG
    capsys.readouterr()  # drain error messages


def test_sweep_subcommand_radial_mode(tmp_path):
    out = tmp_path / "run"
    rc = main(["sweep", "--disk", "1", "--mode", "radial",
               "--kappa-grid", "0.3,3", "--gamma-grid", "0.1,1",
               "--out", str(out)])
    assert rc == EXIT_OK
    lines = (out / "diagram.csv").read_text().splitlines()
    assert len(lines) == 5  # header + 4 cells
    assert lines[0] == ("kappa,gamma,class,E_min,E_e3,E_inplane,"
                        "kappa_gamma,gamma_kappa")
    first = lines[1].split(",")
    assert float(first[0]) == 0.3 and float(first[1]) == 0.1
    assert first[2] == "constant-e3"
    report = json.loads((out / "report.json").read_text())
    assert report["cells"] == 4
    assert report["class_counts"] == {"constant-e3": 2,
                                      "constant-inplane": 1,
                                      "nonconstant": 1}
    assert report["failures"] == []
    _manifest_checks(out)


def test_sweep_requires_grids(tmp_path, capsys):
    rc = main(["sweep", "--disk", "1", "--mode", "radial",
               "--out", str(tmp_path / "run")])
    assert rc == EXIT_CONFIG
    assert "grid" in capsys.readouterr().err


def test_verify_subcommand_all_checks_pass(tmp_path, capsys):
    out = tmp_path / "run"
    rc = main(["verify", "--disk", "1", "--mesh", "24", "48",
               "--kappa2", "8", "--gamma", "0.1", "--seeds", "2",
               "--init", "radial-seed", "--out", str(out)])
    assert rc == EXIT_OK
    stdout = capsys.readouterr().out
    assert stdout.count("PASS") == 8
    assert "FAIL" not in stdout
    verdicts = json.loads((out / "verify.json").read_text())["verdicts"]
    assert all(v is True for v in verdicts.values())


def test_verify_subcommand_fails_with_exit_3(tmp_path, capsys):
    out = tmp_path / "run"
    rc = main(["verify", "--disk", "1", "--mesh", "12", "24",
               "--kappa", "0.3", "--gamma", "1", "--seeds", "2",
               "--max-iterations", "1", "--out", str(out)])
    assert rc == EXIT_SOLVER
    assert "FAIL converged" in capsys.readouterr().out


def test_verify_subcommand_requires_two_seeds(tmp_path, capsys):
    rc = main(["verify", "--disk", "1", "--mesh", "12", "24",
               "--kappa", "0.3", "--gamma", "1", "--seeds", "1",
               "--out", str(tmp_path / "run")])
    assert rc == EXIT_CONFIG
    assert "seeds" in capsys.readouterr().err


def test_json_format_swaps_tabular_artifacts(tmp_path):
    out = tmp_path / "radial"
    rc = main(["radial", "--disk", "1", "--kappa", "1", "--gamma", "0.5",
               "--format", "json", "--out", str(out)])
    assert rc == EXIT_OK
    assert (out / "profile.json").is_file()
    assert not (out / "profile.csv").exists()
    profile = json.loads((out / "profile.json").read_text())
    assert set(profile) == {"r", "u", "u_prime", "phi", "m1", "m3"}

    out2 = tmp_path / "solve"
    rc = main(["solve2d", "--disk", "1", "--mesh", "8", "16",
               "--kappa", "0.3", "--gamma", "1", "--format", "json",
               "--out", str(out2)])
    assert rc == EXIT_OK
    assert (out2 / "field.json").is_file()
    assert not (out2 / "field.csv").exists()


def test_module_execution_smoke(tmp_path):
    out = tmp_path / "run"
    proc = subprocess.run(
        [sys.executable, "-m", "spheremin.cli", "constants", "--disk", "1",
         "--mesh", "8", "16", "--gamma", "1", "--out", str(out)],
        capture_output=True, text=True)
    assert proc.returncode == EXIT_OK
    assert (out / "constants.json").is_file()
    assert "kappa_gamma" in proc.stdout
