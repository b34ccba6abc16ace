"""Command-line interface tests: determinism, exit codes, formats, config."""

from __future__ import annotations

import json

import pytest

from swhops.analytic import delivery_table
from swhops.cli import _parse_grid, main
from swhops.errors import ValidationError


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_analytic_row_count_and_summary(tmp_path, capsys):
    out = tmp_path / "curve.csv"
    code, stdout, _ = run_cli(capsys, "analytic", "--R", "102", "--out", str(out))
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "k,d_lo/r,d_hi/r,beta_k,u_k,g_k"
    assert len(lines) - 1 == 52  # k = 0 .. k_max + 1 with k_max = 50
    assert "k_max = 50" in stdout
    assert "alpha = " in stdout and "plateau" in stdout


def test_analytic_boundary_ratio_rejected(capsys):
    code, _, stderr = run_cli(capsys, "analytic", "--R", "2")
    assert code == 2
    assert "error:" in stderr
    # Ratios just above 2 where the one-hop landing probability would reach 1
    # are also invalid model parameters.
    code2, _, stderr2 = run_cli(capsys, "analytic", "--R", "2.3")
    assert code2 == 2


def test_analytic_json_mirror(tmp_path, capsys):
    out = tmp_path / "curve.json"
    code, _, _ = run_cli(capsys, "analytic", "--R", "20", "--format", "json",
                         "--out", str(out))
    assert code == 0
    payload = json.loads(out.read_text())
    curve = delivery_table(20.0, 1.0)
    assert payload["k_max"] == 9
    assert payload["alpha"] == curve.params.alpha
    assert payload["plateau"] == curve.g[10]
    assert len(payload["bands"]) == 11
    assert payload["bands"][0]["g_k"] == 0.0


def test_simulate_repeat_runs_byte_identical(tmp_path, capsys):
    args = ("simulate", "--d", "2.5", "--n", "1500", "--R", "12",
            "--trials", "120", "--seed", "42")
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert run_cli(capsys, *args, "--out", str(a))[0] == 0
    assert run_cli(capsys, *args, "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_simulate_thread_count_invisible(tmp_path, capsys):
    args = ("simulate", "--d", "3.0", "--n", "2000", "--R", "14",
            "--trials", "150", "--seed", "7")
    files = []
    for label, threads in (("t1", "1"), ("t4", "4"), ("t7", "7")):
        path = tmp_path / f"{label}.csv"
        code, _, _ = run_cli(capsys, *args, "--threads", threads, "--out", str(path))
        assert code == 0
        files.append(path.read_bytes())
    assert files[0] == files[1] == files[2]


def test_simulate_edge_guard_named(capsys):
    code, _, stderr = run_cli(capsys, "simulate", "--d", "5.5", "--n", "100",
                              "--R", "12")
    assert code == 2
    assert "edge-effect guard" in stderr


def test_delta_out_of_range_rejected(capsys):
    code, _, stderr = run_cli(capsys, "tail", "--d", "2", "--n", "100",
                              "--delta", "1.0")
    assert code == 2
    assert "delta" in stderr


def test_unwritable_out_path(tmp_path, capsys):
    code, _, stderr = run_cli(capsys, "analytic", "--R", "20", "--out",
                              str(tmp_path / "missing-dir" / "x.csv"))
    assert code == 2
    assert "error:" in stderr


def test_sweep_writes_rows_and_curve(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    code, stdout, _ = run_cli(
        capsys, "sweep", "--R", "12", "--d-grid", "0:3:1.5", "--n", "300,600",
        "--trials", "40", "--seed", "9", "--out", str(out),
    )
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert len(lines) == 1 + 6  # header + 2 n values x 3 separations
    curve = (tmp_path / "sweep.analytic.csv").read_text().strip().split("\n")
    assert curve[0] == "k,d_lo/r,d_hi/r,beta_k,u_k,g_k"
    assert len(curve) - 1 == 7  # k_max(12/1) = 5 → rows k = 0 .. 6


def test_sweep_analytic_only(tmp_path, capsys):
    out = tmp_path / "curve502.csv"
    code, _, _ = run_cli(capsys, "sweep", "--R", "502", "--out", str(out))
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert len(lines) - 1 == 252  # k_max = 250 → rows k = 0 .. 251


def test_sweep_rerun_identical(tmp_path, capsys):
    args = ("sweep", "--R", "12", "--d-grid", "1.5,2.5", "--n", "400",
            "--trials", "60", "--seed", "3")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_cli(capsys, *args, "--out", str(a), "--threads", "1")
    run_cli(capsys, *args, "--out", str(b), "--threads", "5")
    assert a.read_bytes() == b.read_bytes()


def test_convergence_medians_and_validation(tmp_path, capsys):
    out = tmp_path / "conv.csv"
    args = ("convergence", "--d", "2.0", "--n", "300,900", "--R", "12",
            "--trials", "80", "--seeds", "1,2,3", "--out", str(out))
    code, stdout, _ = run_cli(capsys, *args)
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert len(lines) == 3
    assert "3 seed(s)" in stdout
    code2, _, stderr = run_cli(capsys, "convergence", "--d", "2.0", "--n",
                               "900,300", "--R", "12", "--trials", "10")
    assert code2 == 2 and "ascending" in stderr


def test_tail_output_and_bound(tmp_path, capsys):
    out = tmp_path / "tail.csv"
    code, stdout, _ = run_cli(
        capsys, "tail", "--d", "2.5", "--n", "5000", "--R", "12",
        "--trials", "100", "--seed", "11", "--no-lrc", "--out", str(out),
    )
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "d,n,trials,B,p_exceed"
    row = lines[1].split(",")
    assert row[3] == "3"  # floor(2.5 / 0.9) + 1
    assert "B = 3" in stdout


def test_validate_lrc_default_regions(tmp_path, capsys):
    out = tmp_path / "lrc.csv"
    code, stdout, _ = run_cli(
        capsys, "validate-lrc", "--R", "12", "--n", "800", "--trials", "400",
        "--seed", "5", "--out", str(out),
    )
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "x0,x1,y0,y1,observed,predicted,z,hits"
    assert len(lines) == 1 + 5  # four quadrants + one off-centre rectangle
    assert "none_count = 0" in stdout


def test_config_file_defaults_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("R=12\ntrials=50\nseed=4\nno-lrc=true\n# comment\n\n")
    code, stdout, _ = run_cli(capsys, "simulate", "--config", str(cfg),
                              "--d", "2.5", "--n", "2000")
    assert code == 0
    header, row = stdout.strip().split("\n")[-2:]
    assert row.split(",")[3] == "50"  # trials from file
    code2, stdout2, _ = run_cli(capsys, "simulate", "--config", str(cfg),
                                "--d", "2.5", "--n", "2000", "--trials", "75")
    assert stdout2.strip().split("\n")[-1].split(",")[3] == "75"  # flag wins


def test_config_file_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("qqq=1\n")
    code, _, stderr = run_cli(capsys, "simulate", "--config", str(cfg),
                              "--d", "1.0", "--n", "100")
    assert code == 2
    assert "unknown config key" in stderr


def test_units_of_r_scaling(tmp_path, capsys):
    # R, d, delta scale with r by default; --absolute switches that off.
    scaled = tmp_path / "scaled.csv"
    absolute = tmp_path / "absolute.csv"
    code, _, _ = run_cli(capsys, "simulate", "--d", "2.5", "--n", "1000",
                         "--R", "12", "--r", "2.0", "--trials", "60",
                         "--seed", "6", "--out", str(scaled))
    assert code == 0
    code, _, _ = run_cli(capsys, "simulate", "--d", "5.0", "--n", "1000",
                         "--R", "24", "--delta", "0.2", "--r", "2.0",
                         "--absolute", "--trials", "60", "--seed", "6",
                         "--out", str(absolute))
    assert code == 0
    assert scaled.read_bytes() == absolute.read_bytes()
    row = scaled.read_text().strip().split("\n")[1].split(",")
    assert float(row[0]) == 5.0 and float(row[1]) == 2.5  # d and d/r


def test_json_format_simulate(capsys):
    code, stdout, _ = run_cli(capsys, "simulate", "--d", "1.5", "--n", "500",
                              "--R", "12", "--trials", "40", "--seed", "2",
                              "--format", "json")
    assert code == 0
    payload = json.loads(stdout)
    assert payload["rows"][0]["trials"] == 40


def test_grid_parsing():
    assert _parse_grid("0:1:0.25") == (0.0, 0.25, 0.5, 0.75, 1.0)
    assert _parse_grid("1.5,2.5") == (1.5, 2.5)
    assert _parse_grid("2:2:1") == (2.0,)
    with pytest.raises(ValidationError):
        _parse_grid("0:1:0:9")
    with pytest.raises(ValidationError):
        _parse_grid("0:1:-1")


def test_missing_required_flag(capsys):
    code, _, stderr = run_cli(capsys, "simulate", "--n", "100")
    assert code == 2
    assert "--d is required" in stderr


def test_unknown_subcommand(capsys):
    assert run_cli(capsys, "frobnicate")[0] == 2
