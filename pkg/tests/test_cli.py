"""End-to-end checks of the command-line interface."""

import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest


def run_cli(*argv, cwd=None):
    return subprocess.run([sys.executable, "-m", "periodgeom", *argv],
                          capture_output=True, text=True, cwd=cwd)


def manifest_of(proc):
    return json.loads(proc.stderr)


def test_signature_lattice():
    proc = run_cli("signature", "--lattice", "K3")
    assert proc.returncode == 0
    out = json.loads(proc.stdout)
    assert out == {"positive": 3, "negative": 19, "zero": 0}
    man = manifest_of(proc)
    assert man["subcommand"] == "signature"
    assert "wall_time_ms" in man


def test_signature_gram_file(tmp_path):
    gram = tmp_path / "gram.txt"
    gram.write_text("3\n1 0 0\n0 -1 0\n0 0 -1\n")
    proc = run_cli("signature", "--gram", str(gram), "--exact")
    assert proc.returncode == 0
    assert json.loads(proc.stdout) == {"positive": 1, "negative": 2, "zero": 0}


def test_lebrun_check_and_tolerance_failure():
    proc = run_cli("lebrun", "--signature", "3,4", "--samples", "25",
                   "--seed", "1")
    assert proc.returncode == 0
    out = json.loads(proc.stdout)
    assert out["check_passed"] is True
    assert out["max_plane_distance"] < 1e-9
    assert out["conjugation_law_violations"] == 0

    # an absurd tolerance flips the check without changing the data
    bad = run_cli("lebrun", "--signature", "3,4", "--samples", "25",
                  "--seed", "1", "--tolerance", "1e-30")
    assert bad.returncode == 1
    assert json.loads(bad.stdout)["check_passed"] is False


def test_disc_model():
    proc = run_cli("disc-model", "--grid", "15", "--boundary", "30")
    assert proc.returncode == 0
    out = json.loads(proc.stdout)
    assert out["check_passed"] is True
    assert out["mismatches"] == 0
    assert out["boundary_mismatches"] == 0


def test_retract_and_twistor_intersect():
    proc = run_cli("retract", "--signature", "3,4", "--samples", "20",
                   "--seed", "2")
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["check_passed"] is True

    proc = run_cli("twistor-intersect", "--signature", "3,4", "--samples",
                   "20", "--seed", "2")
    assert proc.returncode == 0
    out = json.loads(proc.stdout)
    assert out["check_passed"] is True
    assert out["conjugate_pair_failures"] == 0
    assert out["max_divisor_residual"] < 1e-10


def test_closedness_small_sample():
    proc = run_cli("closedness", "--signature", "3,4", "--samples", "5",
                   "--seed", "0")
    assert proc.returncode == 0
    out = json.loads(proc.stdout)
    assert out["check_passed"] is True
    assert out["residual_max"] < 1e-6
    assert out["control_max"] > 1e-3


def test_fubini_study_and_invariance():
    proc = run_cli("fubini-study", "--signature", "3,4", "--curves", "3",
                   "--points", "10", "--seed", "4")
    assert proc.returncode == 0
    out = json.loads(proc.stdout)
    assert out["check_passed"] is True
    assert abs(out["constant"] - 4.0) < 1e-8

    proc = run_cli("invariance", "--signature", "3,4", "--samples", "10",
                   "--seed", "4")
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["check_passed"] is True


def test_period_rank_cases():
    expected = {"twistor": 2, "chart": 4, "constant": 0}
    for case, rank in expected.items():
        proc = run_cli("period-rank", "--case", case, "--signature", "3,4")
        assert proc.returncode == 0
        assert json.loads(proc.stdout) == {"case": case, "rank": rank}


def test_torus_dims_match_formulas():
    proc = run_cli("torus-dims", "--n", "3")
    assert proc.returncode == 0
    out = json.loads(proc.stdout)
    assert out["check_passed"] is True
    assert out["3"] == {"all": 18, "orthogonal": 6, "cau": 12,
                        "matches_formulas": True}


def test_torus_reconstruct():
    proc = run_cli("torus-reconstruct", "--n", "2", "--seed", "5")
    assert proc.returncode == 0
    out = json.loads(proc.stdout)
    assert out["check_passed"] is True
    J = np.array(out["J"])
    assert np.max(np.abs(J @ J + np.eye(4))) < 1e-9


def density_rows(text):
    rows = list(csv.DictReader(io.StringIO(text)))
    assert rows, "empty density table"
    return rows


def test_density_negative_norm_counts():
    proc = run_cli("density", "--norm-sign", "-1", "--heights", "1,2")
    assert proc.returncode == 0
    rows = density_rows(proc.stdout)
    assert [int(r["n_vectors"]) for r in rows] == [12, 112]
    assert [int(r["n_hits"]) for r in rows] == [8, 98]
    radii = [float(r["covering_radius"]) for r in rows]
    assert radii[1] < radii[0]


def test_density_positive_default_is_empty_here():
    # in signature (2,2) no positive vector has a positive-definite
    # orthogonal plane, so the default divisor set is empty
    proc = run_cli("density", "--heights", "1,2")
    assert proc.returncode == 0
    rows = density_rows(proc.stdout)
    assert all(int(r["n_hits"]) == 0 for r in rows)


def test_density_disc_file(tmp_path):
    disc = tmp_path / "disc.txt"
    disc.write_text("2\n1 0 -1\n1j 0 1j\n0 2j 0\n0 0 0\n")
    proc = run_cli("density", "--disc", f"file:{disc}", "--heights", "1",
                   "--norm-sign", "-1")
    assert proc.returncode == 0
    density_rows(proc.stdout)


def test_stdout_byte_identical_across_runs():
    a = run_cli("lebrun", "--signature", "3,4", "--samples", "10",
                "--seed", "9")
    b = run_cli("lebrun", "--signature", "3,4", "--samples", "10",
                "--seed", "9")
    assert a.stdout == b.stdout
    ma, mb = manifest_of(a), manifest_of(b)
    ma.pop("wall_time_ms"), mb.pop("wall_time_ms")
    assert ma == mb


def test_density_deterministic_modulo_wall_time():
    a = run_cli("density", "--norm-sign", "-1", "--heights", "1,2")
    b = run_cli("density", "--norm-sign", "-1", "--heights", "1,2")

    def strip_time(text):
        rows = density_rows(text)
        return [{k: v for k, v in r.items() if k != "wall_time_ms"}
                for r in rows]

    assert strip_time(a.stdout) == strip_time(b.stdout)


def test_out_file_and_manifest_sidecar(tmp_path):
    out = tmp_path / "sig.json"
    proc = run_cli("signature", "--lattice", "U", "--out", str(out))
    assert proc.returncode == 0
    assert proc.stdout == ""
    assert json.loads(out.read_text()) == {"positive": 1, "negative": 1,
                                           "zero": 0}
    sidecar = tmp_path / "sig.json.manifest.json"
    man = json.loads(sidecar.read_text())
    assert man["subcommand"] == "signature"
    assert man["flags"]["lattice"] == "U"


def test_plot_writes_figure(tmp_path):
    out = tmp_path / "dm.json"
    proc = run_cli("disc-model", "--grid", "9", "--boundary", "10", "--plot",
                   "--out", str(out))
    assert proc.returncode == 0
    man = json.loads((tmp_path / "dm.json.manifest.json").read_text())
    fig = man["figure"]
    assert fig.endswith(".png")
    assert (tmp_path / "dm.png").exists()


def test_density_plot(tmp_path):
    out = tmp_path / "dens.csv"
    proc = run_cli("density", "--norm-sign", "-1", "--heights", "1", "--plot",
                   "--out", str(out))
    assert proc.returncode == 0
    assert (tmp_path / "dens.png").exists()


def test_fujiki_polarize_file(tmp_path):
    # (x0^2 + x0 x1 + x1^2 - x2^2)^2 expanded into monomials
    quartic = tmp_path / "quartic.txt"
    quartic.write_text(
        "4 0 0 1\n3 1 0 2\n2 2 0 3\n1 3 0 2\n0 4 0 1\n"
        "2 0 2 -2\n1 1 2 -2\n0 2 2 -2\n0 0 4 1\n")
    proc = run_cli("fujiki-polarize", "--file", str(quartic), "--n", "2",
                   "--exact")
    assert proc.returncode == 0
    out = json.loads(proc.stdout)
    assert out["gram"] == [["1", "1/2", "0"], ["1/2", "1", "0"],
                           ["0", "0", "-1"]]
    assert out["constant"] == "1"
    assert out["residual"] == 0.0

    # (x0 + x1)^2 has a singular Gram matrix: not a Fujiki power
    singular = tmp_path / "singular.txt"
    singular.write_text("2 0 1\n1 1 2\n0 2 1\n")
    proc = run_cli("fujiki-polarize", "--file", str(singular), "--n", "1")
    assert proc.returncode == 1
    assert json.loads(proc.stdout)["check_passed"] is False


def test_usage_errors_exit_two():
    assert run_cli("lebrun", "--signature", "nope").returncode == 2
    assert run_cli("signature").returncode == 2
    assert run_cli("density", "--disc", "bogus",
                   "--heights", "1").returncode == 2
    assert run_cli("no-such-command").returncode == 2
