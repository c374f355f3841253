"""Command-line behavior: exit codes, artifacts, manifests, determinism."""

import json
import math

import numpy as np
import pytest

from lpnse.cli import main
from lpnse.manifest import file_hash
from lpnse.snapshots import load_trajectory, read_field

SIM_ARGS = ["--set", "dim=2", "--set", "n=32", "--set", "dt=2.5e-3",
            "--set", "t_end=0.01", "--set", "snap_every=2"]


def test_verify_lp_exit_zero(capsys):
    assert main(["--threads", "1", "verify", "--suite", "lp", "--n", "32"]) == 0
    out = capsys.readouterr().out
    assert "suite: lp" in out and "=> PASS" in out


def test_verify_unknown_suite_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--suite", "nope"])
    assert exc.value.code == 2


def test_verify_negative_control_fails(capsys):
    assert main(["verify", "--suite", "bony", "--no-dealias"]) == 1
    assert "first failure: bony/" in capsys.readouterr().out


def test_verify_csv_determinism(tmp_path, capsys):
    dirs = [tmp_path / "r1", tmp_path / "r2"]
    for outdir in dirs:
        assert main(["verify", "--suite", "bernstein", "--n", "32",
                     "--ensemble", "20", "--out", str(outdir)]) == 0
    capsys.readouterr()
    for name in ("bernstein_forward.csv", "bernstein_reverse.csv"):
        assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes()
    with open(dirs[0] / "manifest.json") as fh:
        manifest = json.load(fh)
    assert manifest["command"] == "verify"
    assert len(manifest["outputs"]) == 2


def test_simulate_writes_trajectory_and_manifest(tmp_path, capsys):
    outdir = tmp_path / "sim"
    assert main(["simulate", *SIM_ARGS, "--out", str(outdir)]) == 0
    traj = load_trajectory(outdir)
    assert len(traj) == 3
    with open(outdir / "manifest.json") as fh:
        manifest = json.load(fh)
    assert manifest["command"] == "simulate"
    for entry in manifest["outputs"]:
        assert file_hash(entry["path"]) == entry["sha256"]
    assert "final_energy" in capsys.readouterr().out


def test_simulate_unknown_key_usage_error(capsys):
    assert main(["simulate", "--set", "resolution=32"]) == 2
    assert "unknown config key" in capsys.readouterr().err


def test_simulate_cfl_abort_numeric_exit(tmp_path, capsys):
    assert main(["simulate", "--set", "dim=2", "--set", "n=32",
                 "--set", "dt=0.2", "--set", "t_end=1.0",
                 "--out", str(tmp_path)]) == 3
    assert "numerical abort [cfl]" in capsys.readouterr().err


def test_twin_report_pipeline(tmp_path, capsys):
    twin_dir = tmp_path / "twin"
    assert main(["twin", *SIM_ARGS, "--delta", "1e-4", "--seed", "5",
                 "--out", str(twin_dir)]) == 0
    assert (twin_dir / "manifest.json").exists()
    capsys.readouterr()
    report_dir = tmp_path / "report"
    assert main(["report", "--u", str(twin_dir / "u"),
                 "--v", str(twin_dir / "v"),
                 "--triple", f"0.5,4,{8.0 / 3.0!r}", "--s", "0.5",
                 "--lambda", "1.0", "--out", str(report_dir)]) == 0
    summary_stdout = json.loads(capsys.readouterr().out)
    with open(report_dir / "summary.json") as fh:
        assert summary_stdout == json.load(fh)
    assert (report_dir / "w_sup.csv").exists()
    assert (report_dir / "manifest.json").exists()


def test_report_malformed_triple_usage_error(capsys):
    assert main(["report", "--u", "nope", "--v", "nope",
                 "--triple", "0.5,4", "--s", "0.5", "--lambda", "1.0"]) == 2
    assert "expects r,p,q" in capsys.readouterr().err


def test_report_invalid_triple_checked_before_io(capsys):
    # scalar parameters are rejected before any trajectory is read
    assert main(["report", "--u", "missing-dir", "--v", "missing-dir",
                 "--triple", "0.5,0.5,8", "--s", "0.5", "--lambda", "1.0"]) == 2
    assert "p >= 1 and q >= 1" in capsys.readouterr().err


def test_besov_and_split_round_trip(tmp_path, capsys):
    sim = tmp_path / "sim"
    assert main(["simulate", *SIM_ARGS, "--out", str(sim)]) == 0
    capsys.readouterr()
    snap = sim / "snap_000000.fld"

    assert main(["besov", "--snapshot", str(snap),
                 "--s", "0.5", "--p", "4"]) == 0
    value = float(capsys.readouterr().out.strip())
    assert value > 0.0 and math.isfinite(value)

    split_dir = tmp_path / "split"
    assert main(["split", "--snapshot", str(snap), "--r", "1.0",
                 "--p", "6", "--q", f"{4.0 / 3.0!r}",
                 "--out", str(split_dir)]) == 0
    meta = json.loads(capsys.readouterr().out)
    assert meta["N"] >= 1 and meta["p_tilde"] > 6.0
    low, _ = read_field(split_dir / "u_low.fld")
    high, _ = read_field(split_dir / "u_high.fld")
    orig, _ = read_field(snap)
    assert np.allclose(low.data + high.data, orig.data,
                       rtol=1e-12, atol=1e-15)


def test_outdir_env_variable(tmp_path, monkeypatch):
    outdir = tmp_path / "envout"
    monkeypatch.setenv("LPNSE_OUTDIR", str(outdir))
    assert main(["simulate", *SIM_ARGS]) == 0
    assert (outdir / "trajectory.json").exists()
