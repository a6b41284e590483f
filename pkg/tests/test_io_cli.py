import numpy as np
import pytest

from ilt_admm.cli import run_cli
from ilt_admm.pgmio import (PatternFormatError, load_config, load_mask,
                            load_pattern, read_history, save_grid,
                            write_history)
from ilt_admm.solver import ConvergenceRecord
from ilt_admm.targets import ten_rectangles

RNG = np.random.default_rng(41)


# ---------------------------------------------------------------- file formats

def test_text_pattern_roundtrip(tmp_path):
    p = tmp_path / "t.txt"
    pattern = (RNG.random((6, 6)) < 0.5).astype(float)
    p.write_text("\n".join(" ".join(str(int(v)) for v in row)
                           for row in pattern))
    assert np.array_equal(load_pattern(p), pattern)


def test_text_pattern_diagnostics(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("0 1\n1 2\n")
    with pytest.raises(PatternFormatError, match="line 2, token 2"):
        load_pattern(p)
    p.write_text("0 1 0\n1 0 1\n")
    with pytest.raises(PatternFormatError, match="non-square"):
        load_pattern(p)
    with pytest.raises(PatternFormatError, match="no such file"):
        load_pattern(tmp_path / "missing.txt")


def test_pgm_binary_roundtrip(tmp_path):
    p = tmp_path / "g.pgm"
    pattern = (RNG.random((8, 8)) < 0.5).astype(float)
    save_grid(pattern, p, mode="binary")
    assert np.array_equal(load_pattern(p), pattern)


def test_p5_pgm_parsing(tmp_path):
    p = tmp_path / "b.pgm"
    pixels = np.array([[0, 255], [255, 0]], dtype=np.uint8)
    p.write_bytes(b"P5\n# comment\n2 2\n255\n" + pixels.tobytes())
    got = load_pattern(p)
    assert np.array_equal(got, [[0.0, 1.0], [1.0, 0.0]])


def test_pgm_half_maxval_convention(tmp_path):
    p = tmp_path / "h.pgm"
    p.write_bytes(b"P5\n2 2\n255\n" + bytes([127, 128, 0, 255]))
    got = load_pattern(p)
    # 128/255 passes the half-maxval cut, 127/255 does not
    assert np.array_equal(got, [[0.0, 1.0], [0.0, 1.0]])


def test_pgm_rejects_malformed(tmp_path):
    p = tmp_path / "bad.pgm"
    p.write_bytes(b"P5\n2 2\n255\n\x00")
    with pytest.raises(PatternFormatError, match="truncated"):
        load_pattern(p)
    # a non-P2/P5 magic falls through to the text parser and fails there
    p.write_bytes(b"P7\n2 2\n255\n\x00\x00\x00\x00")
    with pytest.raises(PatternFormatError):
        load_pattern(p)
    p.write_bytes(b"P5\n2 3\n255\n" + bytes(6))
    with pytest.raises(PatternFormatError, match="non-square"):
        load_pattern(p)


def test_mask_text_full_precision_roundtrip(tmp_path):
    p = tmp_path / "m.txt"
    mask = RNG.random((5, 5))
    save_grid(mask, p, mode="text")
    assert np.array_equal(load_mask(p), mask)


def test_continuous_pgm_writes_scale_comment(tmp_path):
    p = tmp_path / "c.pgm"
    save_grid(np.linspace(0, 1, 16).reshape(4, 4), p, mode="continuous")
    text = p.read_text()
    assert text.startswith("P2\n")
    assert "linear scale" in text
    with pytest.raises(ValueError):
        save_grid(np.zeros((2, 2)), p, mode="nope")


def test_history_roundtrip(tmp_path):
    p = tmp_path / "h.csv"
    records = [ConvergenceRecord(1, 10.5, 3.25, 0.125, True),
               ConvergenceRecord(2, 9.0, 2.0, 0.0625, False)]
    write_history(records, p)
    rows = read_history(p)
    assert rows[0]["iter"] == 1
    assert rows[0]["lagrangian"] == 10.5
    assert rows[1]["step_accepted"] is False
    header = p.read_text().splitlines()[0]
    assert header == "iter,lagrangian,epe_error,primal_residual,step_accepted"


def test_load_config(tmp_path):
    p = tmp_path / "cfg"
    p.write_text("rho = 5\n# full line comment\ngamma=30 # trailing\n\n")
    cfg = load_config(p)
    assert cfg == {"rho": "5", "gamma": "30"}
    p.write_text("no equals sign\n")
    with pytest.raises(PatternFormatError, match="key=value"):
        load_config(p)


# ------------------------------------------------------------------------- cli

def small_target(tmp_path):
    p = tmp_path / "target.pgm"
    save_grid(ten_rectangles(48, width=10, margin=2), p, mode="binary")
    return p


def test_cli_usage_error_exit_code():
    assert run_cli(["optimize"]) == 1
    assert run_cli(["sweep", "--target", "x"]) == 1  # no sweep lists


def test_cli_missing_file_exit_code(tmp_path):
    assert run_cli(["evaluate", "--mask", str(tmp_path / "nope"),
                    "--target", "ten_rectangles"]) == 2


def test_cli_psf(tmp_path, capsys):
    assert run_cli(["psf", "--kernel-size", "20",
                    "--output-dir", str(tmp_path)]) == 0
    assert (tmp_path / "psf_real.txt").exists()
    assert (tmp_path / "psf_magnitude.pgm").exists()
    assert "dc_gain=1.0" in capsys.readouterr().out


def test_cli_optimize_outputs_and_determinism(tmp_path):
    target = small_target(tmp_path)
    args = ["optimize", "--target", str(target), "--kernel-size", "30",
            "--outer-iters", "2", "--quiet"]
    out1, out2 = tmp_path / "run1", tmp_path / "run2"
    assert run_cli(args + ["--output-dir", str(out1)]) == 0
    assert run_cli(args + ["--output-dir", str(out2)]) == 0
    for name in ("mask.txt", "mask.pgm", "wafer.pgm", "epe.pgm", "history.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_cli_evaluate_matches_simulate(tmp_path, capsys):
    target = small_target(tmp_path)
    assert run_cli(["evaluate", "--mask", str(target), "--target", str(target),
                    "--kernel-size", "30"]) == 0
    eval_out = capsys.readouterr().out
    assert run_cli(["simulate", "--mask", str(target), "--target", str(target),
                    "--kernel-size", "30",
                    "--output-dir", str(tmp_path / "sim")]) == 0
    sim_out = capsys.readouterr().out
    line = eval_out.splitlines()[0]
    assert line in sim_out
    assert (tmp_path / "sim" / "aerial.pgm").exists()


def test_cli_config_file_and_flag_precedence(tmp_path, capsys):
    target = small_target(tmp_path)
    cfg = tmp_path / "cfg"
    cfg.write_text("kernel_size=30\nouter_max_iters=1\nrho=5\n")
    # flag overrides the config file's outer_max_iters
    assert run_cli(["optimize", "--target", str(target), "--config", str(cfg),
                    "--outer-iters", "2", "--quiet",
                    "--output-dir", str(tmp_path / "o")]) == 0
    rows = read_history(tmp_path / "o" / "history.csv")
    assert len(rows) == 2


def test_cli_sweep(tmp_path):
    target = small_target(tmp_path)
    out = tmp_path / "sw"
    assert run_cli(["sweep", "--target", str(target), "--kernel-size", "30",
                    "--outer-iters", "1", "--rho", "5,10",
                    "--kernel-noise", "1e-3",
                    "--output-dir", str(out)]) == 0
    files = sorted(f.name for f in out.iterdir())
    assert files == ["history_kernel_noise_0p001.csv", "history_rho_10.csv",
                     "history_rho_5.csv"]


def test_cli_derive(capsys):
    assert run_cli(["derive"]) == 0
    out = capsys.readouterr().out
    assert "first positive zero of J1: 3.831706" in out
    assert "check_rho_condition" in out
