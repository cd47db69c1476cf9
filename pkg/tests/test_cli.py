import csv
import math

import numpy as np
import pytest

from tcsde.cli import MOMENT_COLUMNS, main

PATH_CFG = """\
seed: 17
horizon: 1.0
subordinator: {family: tempered_stable, beta: 0.95, kappa: 1.0, scale: normalized}
sde: {preset: gbm}
simulate_path: {delta: 0.001}
"""


def _cfg(tmp_path, text, name="c.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def _read(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def test_simulate_path_files(tmp_path):
    out = tmp_path / "out"
    assert main(["simulate-path", "--config", str(_cfg(tmp_path, PATH_CFG)),
                 "--out", str(out), "--quiet"]) == 0
    h_tc, tc = _read(out / "time_change.csv")
    h_y, y = _read(out / "approximation.csv")
    h_x, x = _read(out / "near_exact.csv")
    assert h_tc == ["t", "E_delta"] and h_y == h_x == ["t", "y"]
    assert np.array_equal(tc[:, 0], y[:, 0]) and np.array_equal(y[:, 0], x[:, 0])
    assert tc[0].tolist() == [0.0, 0.0] and tc[-1, 0] == 1.0
    # E_delta steps by one delta at each listed jump time
    n = np.rint(tc[:, 1] / 0.001).astype(int)
    assert np.array_equal(n[:-1], np.arange(n.size - 1))
    # flats coincide: wherever E_delta repeats, both value series repeat
    same = np.diff(n) == 0
    assert np.array_equal(np.diff(y[:, 1])[same], np.zeros(same.sum()))
    assert np.array_equal(np.diff(x[:, 1])[same], np.zeros(same.sum()))
    assert np.all(np.diff(y[:, 1])[~same] != 0.0)


def test_simulate_path_byte_identical(tmp_path):
    cfg = _cfg(tmp_path, PATH_CFG)
    for d in ("a", "b"):
        assert main(["simulate-path", "--config", str(cfg), "--out", str(tmp_path / d),
                     "--quiet"]) == 0
    for name in ("time_change.csv", "approximation.csv", "near_exact.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert main(["simulate-path", "--config", str(cfg), "--out", str(tmp_path / "c"),
                 "--seed", "18", "--quiet"]) == 0
    assert (tmp_path / "a" / "time_change.csv").read_bytes() != \
        (tmp_path / "c" / "time_change.csv").read_bytes()


def test_simulate_path_zero_preset(tmp_path):
    text = PATH_CFG.replace("{preset: gbm}", "{preset: zero, y0: [2.5]}")
    out = tmp_path / "out"
    assert main(["simulate-path", "--config", str(_cfg(tmp_path, text)), "--out", str(out),
                 "--quiet"]) == 0
    _, y = _read(out / "approximation.csv")
    assert np.all(y[:, 1] == 2.5)


def test_simulate_path_without_oracle(tmp_path):
    text = PATH_CFG.replace("{preset: gbm}", "{preset: ou}")
    out = tmp_path / "out"
    assert main(["simulate-path", "--config", str(_cfg(tmp_path, text)), "--out", str(out),
                 "--quiet"]) == 0
    assert (out / "approximation.csv").exists()
    assert not (out / "near_exact.csv").exists()


def test_convergence_minimal(tmp_path):
    text = PATH_CFG + "convergence: {deltas: [0.25], n_paths: 2}\n"
    out = tmp_path / "out"
    assert main(["convergence", "--config", str(_cfg(tmp_path, text)), "--out", str(out),
                 "--quiet"]) == 0
    header, rows = _read(out / "convergence.csv")
    assert header == ["delta", "sterr", "sterr_stderr", "wkerr", "wkerr_stderr", "mean_N"]
    assert rows.shape == (1, 6) and rows[0, 0] == 0.25
    assert (out / "convergence_summary.json").exists()


def test_convergence_needs_oracle(tmp_path, capsys):
    text = PATH_CFG.replace("{preset: gbm}", "{preset: ou}") + \
        "convergence: {deltas: [0.25], n_paths: 2}\n"
    assert main(["convergence", "--config", str(_cfg(tmp_path, text)),
                 "--out", str(tmp_path)]) == 2
    assert "exact" in capsys.readouterr().err


def test_invalid_beta_is_validation_error(tmp_path, capsys):
    text = PATH_CFG.replace("beta: 0.95", "beta: 1.5")
    assert main(["convergence", "--config", str(_cfg(tmp_path, text)),
                 "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "subordinator.beta" in err and "line 3" in err


def test_numeric_failure_exit_code(tmp_path, capsys):
    # explicit Euler for a very stiff OU overflows
    text = PATH_CFG.replace("{preset: gbm}", "{preset: ou, params: {theta: 1.0e6}}")
    with np.errstate(over="ignore", invalid="ignore"):
        code = main(["simulate-path", "--config", str(_cfg(tmp_path, text)),
                     "--out", str(tmp_path)])
    assert code == 3
    assert "not finite" in capsys.readouterr().err


def test_io_error_exit_codes(tmp_path):
    assert main(["simulate-path", "--config", str(tmp_path / "missing.yaml")]) == 4
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["simulate-path", "--config", str(_cfg(tmp_path, PATH_CFG)),
                 "--out", str(blocker / "sub")]) == 4


def test_argument_errors(tmp_path):
    assert main([]) == 2
    assert main(["simulate-path"]) == 2
    cfg = str(_cfg(tmp_path, PATH_CFG))
    assert main(["simulate-path", "--config", cfg, "--seed", "-1"]) == 2
    assert main(["convergence", "--config", cfg, "--workers", "0"]) == 2


MOMENTS_CFG = """\
seed: 5
subordinator: {family: stable, beta: 0.5}
moments:
  delta: 0.001
  n_paths: 2000
  orders: [1, 2]
  times: [0.0, 1.0]
  exp_lambda: 0.5
"""


def test_moments_table(tmp_path):
    out = tmp_path / "out"
    assert main(["moments", "--config", str(_cfg(tmp_path, MOMENTS_CFG)), "--out", str(out),
                 "--quiet"]) == 0
    with open(out / "moments.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert tuple(rows[0]) == MOMENT_COLUMNS
    by = {(r["quantity"], float(r["param"]), float(r["t"])): r for r in rows}
    assert float(by["moment", 1.0, 1.0]["analytic"]) == pytest.approx(2 / math.sqrt(math.pi),
                                                                      rel=1e-14)
    for n in (1.0, 2.0):
        r = by["moment", n, 0.0]
        assert float(r["analytic"]) == float(r["mc_mean"]) == 0.0
    assert float(by["exp_moment", 0.5, 0.0]["analytic"]) == 1.0
    assert all(r["within_band"] == "true" for r in rows)


def test_moments_tempered_has_no_analytic(tmp_path):
    text = MOMENTS_CFG.replace("{family: stable, beta: 0.5}",
                               "{family: tempered_stable, beta: 0.5, kappa: 1.0}")
    text = text.replace("n_paths: 2000", "n_paths: 20")
    out = tmp_path / "out"
    assert main(["moments", "--config", str(_cfg(tmp_path, text)), "--out", str(out),
                 "--quiet"]) == 0
    with open(out / "moments.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert all(math.isnan(float(r["analytic"])) and r["within_band"] == "" for r in rows)


def test_convergence_workers_do_not_change_output(tmp_path):
    text = PATH_CFG + "convergence: {delta_exponents: [3, 4], n_paths: 8}\n"
    cfg = str(_cfg(tmp_path, text))
    for d, w in (("w1", "1"), ("w2", "2")):
        assert main(["convergence", "--config", cfg, "--out", str(tmp_path / d),
                     "--workers", w, "--quiet"]) == 0
    assert (tmp_path / "w1" / "convergence.csv").read_bytes() == \
        (tmp_path / "w2" / "convergence.csv").read_bytes()
