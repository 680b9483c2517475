import json
import os
import subprocess
import sys

import numpy as np
import pytest

from maxent_inversion import cli, fileio
from maxent_inversion.fileio import read_pgm, read_vector_csv, write_matrix_csv, write_vector_csv

from conftest import MNIST_FIXTURE


def _invert(tmp_path, w, z, *extra):
    write_matrix_csv(tmp_path / "w.csv", w)
    write_vector_csv(tmp_path / "z.csv", z)
    argv = [
        "invert", "--w", str(tmp_path / "w.csv"), "--z", str(tmp_path / "z.csv"),
        "--out", str(tmp_path / "x.csv"), "--report", str(tmp_path / "r.json"), *extra,
    ]
    return cli.main(argv)


def test_invert_ted_pair(tmp_path):
    assert _invert(tmp_path, [[1.0], [1.0]], [1.0], "--prior", "ted") == 0
    np.testing.assert_allclose(read_vector_csv(tmp_path / "x.csv"), [0.5, 0.5], atol=1e-12)
    rep = json.loads((tmp_path / "r.json").read_text())
    assert list(rep)[:5] == ["command", "parameters", "residual_inf", "iterations", "entropy"]
    assert rep["command"] == "invert" and rep["status"] == "converged"
    assert list(rep)[-1] == "timings_ms"


def test_invert_per_element(tmp_path, rng):
    w = rng.standard_normal((6, 2))
    x = np.array([0.2, 0.7, 1.5, 3.0, 0.4, 0.9])
    (tmp_path / "kinds.csv").write_text("ted,ted\nexp,exp\ntg,ted\n")
    code = _invert(tmp_path, w, w.T @ x, "--prior-per-element", str(tmp_path / "kinds.csv"))
    assert code == 0
    out = read_vector_csv(tmp_path / "x.csv")
    np.testing.assert_allclose(w.T @ out, w.T @ x, atol=1e-9)


def test_invert_rank_deficient(tmp_path, capsys):
    assert _invert(tmp_path, [[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]], [1.0, 2.0], "--prior", "ted") == 1
    err = capsys.readouterr().err
    assert "rank" in err and "--w" in err


def test_invert_infeasible(tmp_path):
    assert _invert(tmp_path, [[1.0], [1.0]], [2.5], "--prior", "ted") == 2
    rep = json.loads((tmp_path / "r.json").read_text())
    assert rep["status"] == "infeasible"


def test_invert_max_iterations(tmp_path, rng):
    w = rng.standard_normal((10, 3))
    z = w.T @ rng.random(10)
    assert _invert(tmp_path, w, z, "--prior", "ted", "--max-iter", "1") == 2
    assert json.loads((tmp_path / "r.json").read_text())["status"] == "max_iterations"


def test_invert_input_errors(tmp_path, capsys):
    assert _invert(tmp_path, [[1.0], [1.0]], [1.0]) == 1
    assert "--prior" in capsys.readouterr().err
    assert _invert(tmp_path, [[1.0], [1.0]], [1.0, 2.0], "--prior", "ted") == 1
    assert "--z" in capsys.readouterr().err
    (tmp_path / "k.csv").write_text("ted,cauchy\n")
    assert _invert(tmp_path, [[1.0], [1.0]], [1.0], "--prior-per-element", str(tmp_path / "k.csv")) == 1
    assert "--prior-per-element" in capsys.readouterr().err
    assert cli.main(["invert", "--w", str(tmp_path / "missing.csv"), "--z", "z", "--prior", "ted",
                     "--out", "o", "--report", "r"]) == 1
    assert "--w" in capsys.readouterr().err
    assert _invert(tmp_path, [[1.0], [1.0]], [1.0], "--prior", "ted", "--tol", "-1") == 1


def test_unknown_flag_and_abbreviation():
    assert cli.main(["spectrum", "--bogus"]) == 1
    assert cli.main(["spectrum", "--ord", "3", "--report", "r"]) == 1
    assert cli.main([]) == 1


def test_spectrum(tmp_path):
    rep_path = tmp_path / "s.json"
    assert cli.main(["spectrum", "--seed", "4", "--report", str(rep_path), "--out", str(tmp_path / "s.csv")]) == 0
    rep = json.loads(rep_path.read_text())
    assert rep["max_rel_deviation"] <= 1e-6
    assert rep["parameters"]["filter"]["pole_radius"] == 0.5
    assert rep["parameters"]["seed"] == 4
    cols = np.loadtxt(tmp_path / "s.csv", delimiter=",")
    assert cols.shape == (65, 3)


def test_spectrum_seed_env(tmp_path, monkeypatch):
    monkeypatch.setenv("MAXENT_SEED", "9")
    assert cli.main(["spectrum", "--seed", "1", "--nfft", "32", "--order", "2", "--report", str(tmp_path / "s.json")]) == 0
    assert json.loads((tmp_path / "s.json").read_text())["parameters"]["seed"] == 9
    monkeypatch.setenv("MAXENT_SEED", "x")
    assert cli.main(["spectrum", "--report", str(tmp_path / "s.json")]) == 1


def test_spectrum_tolerance_miss_exits_2(tmp_path):
    # a strongly resonant filter makes the DFT-grid aliasing exceed the tolerance
    code = cli.main(["spectrum", "--nfft", "16", "--order", "2", "--pole-radius", "0.97",
                     "--seed", "0", "--report", str(tmp_path / "s.json")])
    rep = json.loads((tmp_path / "s.json").read_text())
    assert rep["max_rel_deviation"] > 1e-6
    assert code == 2


def test_spectrum_bad_order(tmp_path, capsys):
    assert cli.main(["spectrum", "--nfft", "8", "--order", "4", "--report", str(tmp_path / "s.json")]) == 1
    assert "--order" in capsys.readouterr().err


def test_autoencode(tmp_path):
    out = tmp_path / "pgm"
    rep_path = tmp_path / "a.json"
    argv = ["autoencode", "--images", str(MNIST_FIXTURE), "--count", "2", "--out-dir", str(out), "--report", str(rep_path)]
    assert cli.main(argv) == 0
    names = sorted(os.listdir(out))
    assert names == [f"{i:03d}_{t}.pgm" for i in range(2) for t in ("exp", "original", "pinv", "ted")]
    assert read_pgm(out / "000_ted.pgm").shape == (28, 28)
    rep = json.loads(rep_path.read_text())
    assert rep["clipped_pixels"] == sum(
        im["original_clipped"] + im["pinv_clipped"] + im["exp_clipped"] + im["ted_clipped"] for im in rep["images"]
    )
    assert all(im["ted"]["out_of_range"] == 0 for im in rep["images"])


def test_autoencode_bad_inputs(tmp_path, capsys):
    base = ["autoencode", "--images", str(MNIST_FIXTURE), "--out-dir", str(tmp_path / "o"), "--report", str(tmp_path / "r")]
    assert cli.main(base + ["--keep", "28"]) == 1
    assert "--keep" in capsys.readouterr().err
    assert cli.main(base + ["--side", "20"]) == 1
    assert cli.main(base + ["--count", "11"]) == 1
    bad = tmp_path / "bad"
    bad.write_bytes(b"\x00\x00\x08\x01" + bytes(12))
    assert cli.main(["autoencode", "--images", str(bad), "--out-dir", str(tmp_path / "o"), "--report", str(tmp_path / "r")]) == 1
    assert not (tmp_path / "o").exists()


def test_autoencode_removes_partial_output(tmp_path, monkeypatch):
    calls = []
    real = fileio.write_pgm

    def flaky(path, image, side, clamp=True):
        calls.append(path)
        if len(calls) == 5:
            raise OSError("disk full")
        return real(path, image, side, clamp)

    monkeypatch.setattr(fileio, "write_pgm", flaky)
    out = tmp_path / "pgm"
    argv = ["autoencode", "--images", str(MNIST_FIXTURE), "--count", "2", "--out-dir", str(out), "--report", str(tmp_path / "a.json")]
    assert cli.main(argv) == 1
    assert not out.exists()
    assert not (tmp_path / "a.json").exists()


def test_selftest(capsys, monkeypatch):
    assert cli.main(["selftest"]) == 0
    assert "FAIL" not in capsys.readouterr().out
    assert cli.main(["selftest", "--json"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert len(rows) == 8 and all(r["passed"] for r in rows)
    monkeypatch.setenv("MAXENT_SELFTEST_TOL_SCALE", "0")
    assert cli.main(["selftest"]) != 0


def _strip_timings(path):
    rep = json.loads(path.read_text())
    rep.pop("timings_ms")
    return rep


def test_deterministic_outputs(tmp_path):
    for tag in ("a", "b"):
        d = tmp_path / tag
        d.mkdir()
        assert cli.main(["spectrum", "--seed", "3", "--report", str(d / "s.json"), "--out", str(d / "s.csv")]) == 0
        assert cli.main(["autoencode", "--images", str(MNIST_FIXTURE), "--count", "2",
                         "--out-dir", str(d / "pgm"), "--report", str(d / "a.json")]) == 0
    a, b = tmp_path / "a", tmp_path / "b"
    assert (a / "s.csv").read_bytes() == (b / "s.csv").read_bytes()
    assert _strip_timings(a / "s.json") == _strip_timings(b / "s.json")
    assert _strip_timings(a / "a.json")["images"] == _strip_timings(b / "a.json")["images"]
    for name in os.listdir(a / "pgm"):
        assert (a / "pgm" / name).read_bytes() == (b / "pgm" / name).read_bytes()


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "maxent_inversion", "spectrum", "--nfft", "32", "--order", "2",
         "--report", str(tmp_path / "s.json")],
        capture_output=True, text=True, timeout=60,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "s.json").exists()
