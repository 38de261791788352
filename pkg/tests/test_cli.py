import subprocess
import sys

import numpy as np
import pytest

from conftest import random_image, smooth_image
from fastvf import RgbImage, evaluate, load_ppm, save_ppm
from fastvf.cli import main
from fastvf.fastmath import DEFAULT_TABLE
from fastvf.minimax import PolyApprox, write_table


@pytest.fixture
def clean(tmp_path):
    p = tmp_path / "clean.ppm"
    save_ppm(smooth_image(0, 40, 32), p)
    return p


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_noise_deterministic(tmp_path, clean, capsys):
    a, b = tmp_path / "a.ppm", tmp_path / "b.ppm"
    for out in (a, b):
        code, text, _ = run(capsys, "noise", clean, out, "--model", "correlated", "--phi", 0.1, "--seed", 42)
        assert code == 0 and "seed=42" in text and "corrupted_fraction=" in text
    assert a.read_bytes() == b.read_bytes()


def test_noise_phi_zero(tmp_path, clean, capsys):
    out = tmp_path / "n.ppm"
    assert run(capsys, "noise", clean, out, "--phi", 0)[0] == 0
    assert load_ppm(out) == load_ppm(clean)


def test_noise_bad_phi(tmp_path, clean, capsys):
    code, _, err = run(capsys, "noise", clean, tmp_path / "n.ppm", "--phi", 1.5)
    assert code == 1 and "phi out of range" in err


def test_noise_ascii(tmp_path, clean, capsys):
    out = tmp_path / "n.ppm"
    assert run(capsys, "noise", clean, out, "--ascii")[0] == 0
    assert out.read_bytes().startswith(b"P3")


def test_filter_constant(tmp_path, capsys):
    src, out = tmp_path / "c.ppm", tmp_path / "o.ppm"
    save_ppm(RgbImage(np.full((9, 9, 3), 60, np.uint8)), src)
    assert run(capsys, "filter", src, out, "--family", "bvdf", "--mode", "exact")[0] == 0
    assert load_ppm(out) == load_ppm(src)


def test_filter_evmf_approx(tmp_path, clean, capsys):
    code, text, _ = run(capsys, "filter", clean, tmp_path / "o.ppm", "--family", "evmf", "--mode", "approx", "--window", 3)
    assert code == 0 and "elapsed=" in text


def test_filter_even_window(tmp_path, clean, capsys):
    code, _, err = run(capsys, "filter", clean, tmp_path / "o.ppm", "--family", "bvdf", "--window", 4)
    assert code == 1 and "window must be odd" in err


def test_filter_missing_input(tmp_path, capsys):
    assert run(capsys, "filter", tmp_path / "none.ppm", tmp_path / "o.ppm", "--family", "bvdf")[0] == 1


def test_eval(tmp_path, clean, capsys):
    code, text, _ = run(capsys, "eval", clean, clean)
    assert code == 0 and text.startswith("mae=0 mse=0 ncd=0")
    noisy = tmp_path / "n.ppm"
    run(capsys, "noise", clean, noisy, "--phi", 0.2, "--seed", 3)
    code, text, _ = run(capsys, "eval", clean, noisy)
    assert code == 0
    assert text.strip() == evaluate(load_ppm(clean), load_ppm(noisy)).line()


def test_eval_mismatch(tmp_path, clean, capsys):
    other = tmp_path / "o.ppm"
    save_ppm(random_image(0, 8), other)
    assert run(capsys, "eval", clean, other)[0] == 1


def test_bench(tmp_path, capsys):
    src = tmp_path / "big.ppm"
    save_ppm(smooth_image(1, 512), src)
    code, text, _ = run(capsys, "bench", src, "--family", "BVDF", "--phi", 0.1, "--seed", 1)
    assert code == 0
    fields = dict(kv.split("=") for kv in text.split() if "=" in kv)
    assert fields["runs"] == "5"
    assert float(fields["approx_time"]) < float(fields["exact_time"])
    assert float(fields["speedup_percent"]) > 0
    assert abs(float(fields["mae"])) <= 2.0


def test_bench_zero_runs(clean, capsys):
    assert run(capsys, "bench", clean, "--family", "BVDF", "--runs", 0)[0] == 1


def test_fit_expneg(tmp_path, capsys):
    out = tmp_path / "t.txt"
    code, text, _ = run(capsys, "fit", "expneg", "--degree", 3, "--interval", "0,10", "--out", out)
    assert code == 0
    eps = float(text.split("eps=")[1].split()[0])
    assert eps == pytest.approx(8.259345e-02, rel=1e-4)
    assert out.read_text().startswith("EXP_POLY3 kind=poly")
    code, text, _ = run(capsys, "fit", "expneg", "--degree", 2)
    assert float(text.split("eps=")[1].split()[0]) == pytest.approx(1.785517e-01, rel=1e-4)


def test_fit_arccos(capsys):
    code, text, _ = run(capsys, "fit", "arccos")
    assert code == 0
    assert float(text.split("eps=")[1].split()[0]) == pytest.approx(1.048949e-05, rel=0.05)


def test_fit_unknown_function(capsys):
    with pytest.raises(SystemExit) as info:
        main(["fit", "tanh"])
    assert info.value.code == 1


def test_fit_nonconvergence(capsys):
    code, _, err = run(capsys, "fit", "arccos", "--degree", 6, "--interval", "0,0.9", "--tol", 1e-15, "--max-iters", 1)
    assert code == 1 and "converge" in err


def test_verify_default(capsys):
    code, text, _ = run(capsys, "verify-coeffs")
    lines = text.strip().splitlines()
    assert code == 0 and len(lines) == 5
    assert all(line.endswith("PASS") for line in lines)


def test_verify_all(capsys):
    code, text, _ = run(capsys, "verify-coeffs", "--all", "--grid-points", 10**5)
    assert code == 0 and len(text.strip().splitlines()) == 8


def test_verify_coarse(capsys):
    code, _, err = run(capsys, "verify-coeffs", "--grid-points", 100)
    assert code == 1 and "grid too coarse" in err


def test_verify_perturbed_table(tmp_path, capsys):
    bad = list(DEFAULT_TABLE.arccos_poly.coeffs)
    bad[1] *= 1.001
    path = tmp_path / "bad.txt"
    write_table(path, {"ARCCOS": PolyApprox(bad, (0.0, 0.5), DEFAULT_TABLE.arccos_poly.eps)})
    code, text, _ = run(capsys, "verify-coeffs", "--table", path)
    assert code == 2 and "FAIL" in text


def test_fitted_table_round_trip(tmp_path, capsys):
    path = tmp_path / "acos.txt"
    assert run(capsys, "fit", "arccos", "--out", path)[0] == 0
    assert run(capsys, "verify-coeffs", "--table", path, "--grid-points", 10**5)[0] == 0
    src = tmp_path / "s.ppm"
    save_ppm(random_image(9, 16), src)
    assert run(capsys, "filter", src, tmp_path / "o.ppm", "--family", "BVDF", "--mode", "approx", "--table", path)[0] == 0


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "fastvf", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "verify-coeffs" in res.stdout
