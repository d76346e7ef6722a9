import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from xyquench import cli
from xyquench.quadrature import QuadratureSpec


def _read(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _run(tmp_path, *args, name="out.csv"):
    out = tmp_path / name
    code = cli.main([*args, "--out", str(out)])
    return code, out


def test_series_xx_line_is_all_zero(tmp_path):
    code, out = _run(tmp_path, "--mode", "series", "--lambda", "0.5", "--gamma", "0",
                     "--tmax", "2", "--dt", "0.1")
    assert code == 0
    header, rows = _read(out)
    assert header == cli.SERIES_COLUMNS
    assert len(rows) == 21
    for row in rows:
        assert [float(v) for v in row[1:4]] == [0.0, 0.0, 0.0]
    meta = json.loads(cli.sidecar_path(out).read_text())
    assert meta["config"]["gamma"] == 0.0 and meta["version"]
    assert meta["wall_clock_seconds"] >= 0


def test_series_values_round_trip_at_full_precision(tmp_path):
    from xyquench import ModelParams, rho_nn
    code, out = _run(tmp_path, "--lambda", "0.5", "--gamma", "1", "--tmax", "1", "--dt", "0.5")
    assert code == 0
    _, rows = _read(out)
    last = rows[-1]
    x = rho_nn(ModelParams(0.5, 1.0), 1.0)
    assert float(last[4]) == x.r11
    assert float(last[8]) == x.r14.real


def test_sweep_and_nnn_pair(tmp_path):
    code, out = _run(tmp_path, "--mode", "sweep", "--lambda-range", "0.5:0.7:0.1",
                     "--gamma-list", "1", "--pair", "nnn", "--tmax", "1", "--dt", "0.25")
    assert code == 0
    _, rows = _read(out)
    assert len(rows) == 15


def test_cmax_mode(tmp_path):
    code, out = _run(tmp_path, "--mode", "cmax", "--lambda-range", "0.9:1.0:0.05",
                     "--gamma-list", "1", "--tmax", "4", "--dt", "0.02")
    assert code == 0
    header, rows = _read(out)
    assert header == ["gamma", "lambda", "t_star", "c_max", "found"]
    assert len(rows) == 3
    summary = json.loads(cli.sidecar_path(out).read_text())["summary"]
    assert 0.9 <= summary["gamma=1.0"]["lambda_star"] <= 1.0


def test_boundary_mode_reports_degenerate(tmp_path):
    code, out = _run(tmp_path, "--mode", "boundary", "--lambda-range", "0.5:1.0:0.5",
                     "--gamma-list", "0", "--tmax", "1", "--dt", "0.1")
    assert code == 0
    assert "degenerate" in json.loads(cli.sidecar_path(out).read_text())["summary"]["gamma=0.0"]


def test_nnn_scan_mode(tmp_path):
    code, out = _run(tmp_path, "--mode", "nnn-scan", "--lambda-range", "0.5:1.2:0.7",
                     "--gamma-list", "1", "--tmax", "5", "--dt", "0.05")
    assert code == 0
    _, rows = _read(out)
    assert [r[1] for r in rows] == ["0.5", "1.2"]


def test_oracle_compare_mode(tmp_path):
    code, out = _run(tmp_path, "--mode", "oracle-compare", "--lambda", "1.2", "--gamma", "1",
                     "--ring-size", "8", "--tmax", "0.5", "--dt", "0.25")
    assert code == 0
    header, rows = _read(out)
    assert header == ["t", "nn", "nnn_wick_derived", "nnn_as_printed"]
    dev = json.loads(cli.sidecar_path(out).read_text())["summary"]["max_deviation"]
    assert set(dev) == {"nn", "wick_derived", "as_printed"}


@pytest.mark.parametrize("args, field", [
    (["--lambda", "-1", "--gamma", "1"], "lambda"),
    (["--lambda", "0.5", "--gamma", "2"], "gamma"),
    (["--lambda", "0.5"], "gamma"),
    (["--lambda", "0.5", "--gamma", "1", "--dt", "0"], "dt"),
    (["--mode", "sweep", "--gamma-list", "1", "--lambda-range", "1:0:0.1"], "lambda-range"),
    (["--mode", "cmax", "--gamma-list", "0", "--lambda-range", "0.5:1:0.5"], "gamma"),
])
def test_invalid_config_exits_1(tmp_path, caplog, args, field):
    code, out = _run(tmp_path, *args)
    assert code == 1
    assert field in caplog.text
    assert not out.exists()


def test_non_convergence_exits_2(tmp_path, monkeypatch, caplog):
    monkeypatch.setattr(cli.RunConfig, "quadrature",
                        lambda self: QuadratureSpec(min_panels=8, max_panels=16))
    code, _ = _run(tmp_path, "--lambda", "0.9", "--gamma", "1", "--tmax", "50", "--dt", "25")
    assert code == 2
    assert "lambda" in caplog.text and "t" in caplog.text


def test_rerun_from_sidecar_is_byte_identical(tmp_path):
    code, out = _run(tmp_path, "--lambda", "0.7", "--gamma", "0.8", "--tmax", "3", "--dt", "0.05")
    assert code == 0
    again = tmp_path / "again.csv"
    assert cli.main(["--config", str(cli.sidecar_path(out)), "--out", str(again)]) == 0
    assert again.read_bytes() == out.read_bytes()


@pytest.mark.parametrize("mode_args", [
    ["--lambda", "0.9", "--gamma", "1", "--tmax", "12", "--dt", "0.01"],
    ["--mode", "cmax", "--lambda-range", "0.9:1.0:0.05", "--gamma-list", "1",
     "--tmax", "3", "--dt", "0.02"],
])
def test_worker_count_does_not_change_output(tmp_path, mode_args):
    outs = []
    for w in (1, 4, 8):
        code, out = _run(tmp_path, *mode_args, "--workers", str(w), name=f"w{w}.csv")
        assert code == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_module_entry_point(tmp_path):
    out = tmp_path / "m.csv"
    proc = subprocess.run([sys.executable, "-m", "xyquench", "--lambda", "0.5", "--gamma", "1",
                           "--tmax", "0.2", "--dt", "0.1", "--out", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert np.isclose(float(_read(out)[1][0][0]), 0.0)
