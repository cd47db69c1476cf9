"""End-to-end acceptance checks, one test per criterion.

Each test records a one-line PASS/FAIL verdict (shown in the pytest terminal
summary under "acceptance criteria") before asserting.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from tcsde import (StudyConfig, SubordinatorSpec, euler_maruyama, fit_loglog, gbm_exact,
                   laplace_exponent, laplace_exponent_quad, make_stream, mittag_leffler,
                   normalized_scale, preset, run_convergence_study, sample_increments,
                   simulate_path_until, stable_inverse_moment)
from tcsde.cli import cmd_convergence
from tcsde.config import load_config
from tcsde.harness import sup_error_samples
from tcsde.timechange import coupled_time_changes

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
SEED = 20240501


def record(n, ok, detail):
    ACCEPTANCE_LINES.append(f"[criterion {n:>2}] {'PASS' if ok else 'FAIL'}  {detail}")
    return ok


@pytest.fixture(scope="module")
def study():
    return SubordinatorSpec.tempered_stable(0.95, 1.0, scale=normalized_scale(0.95))


@pytest.fixture(scope="module")
def study_report(study):
    cfg = StudyConfig(study, preset="gbm", horizon=1.0, n_paths=300, master_seed=SEED)
    started = time.perf_counter()
    report = run_convergence_study(cfg)
    return report, time.perf_counter() - started


@pytest.fixture(scope="module")
def inverse_stable_samples():
    # E_delta(1) for the standard stable subordinator, beta = 0.9
    beta, delta, n = 0.9, 1e-3, 10_000
    spec = SubordinatorSpec.stable(beta)
    started = time.perf_counter()
    e = np.array([simulate_path_until(spec, delta, 1.0, make_stream(SEED, 4, i)).stop_index
                  for i in range(n)]) * delta
    return beta, delta, e, time.perf_counter() - started


def test_criterion_01_sampler_laplace():
    dt, n = 1e-3, 100_000
    started = time.perf_counter()
    worst = 0.0
    for k, spec in enumerate([SubordinatorSpec.stable(0.95),
                              SubordinatorSpec.tempered_stable(0.95, 1.0)]):
        z = sample_increments(spec, dt, n, make_stream(SEED, 1, k))
        for s in (0.5, 1.0, 2.0):
            e = np.exp(-s * z)
            target = math.exp(-dt * laplace_exponent(spec, s))
            worst = max(worst, abs(e.mean() - target) / (e.std(ddof=1) / math.sqrt(n)))
    elapsed = time.perf_counter() - started
    ok = worst <= 3.0 and elapsed < 10.0
    record(1, ok, f"max |z| = {worst:.2f} SE (<= 3), {elapsed:.1f} s (< 10)")
    assert ok


def test_criterion_02_tempered_closed_form():
    spec = SubordinatorSpec.tempered_stable(0.95, 1.0)
    rel = max(abs(laplace_exponent(spec, s) / laplace_exponent_quad(spec, s) - 1.0)
              for s in (0.1, 1.0, 5.0))
    ok = rel <= 1e-6
    record(2, ok, f"max relative gap {rel:.2e} (<= 1e-6)")
    assert ok


def test_criterion_03_sandwich(study):
    delta, horizon = 1e-3, 1.0
    rng_t = np.random.default_rng(SEED)
    level_bad = refine_bad = 0
    for i in range(1000):
        coarse, fine = coupled_time_changes(study, delta, horizon, make_stream(SEED, 3, i))
        n = coarse.stop_index
        jumps = coarse.jump_times[: n + 1]
        level_bad += int(np.count_nonzero(coarse(jumps) != np.arange(n + 1) * delta))
        ts = rng_t.uniform(0.0, horizon, 100)
        gap = coarse(ts) - fine(ts)
        refine_bad += int(np.count_nonzero((np.abs(gap) > delta) | (gap > 0)))
    ok = level_bad == 0 and refine_bad == 0
    record(3, ok, f"jump-level violations {level_bad}, refinement violations {refine_bad}"
                  " (1000 paths x 100 times)")
    assert ok


def test_criterion_04_inverse_stable_moments(inverse_stable_samples):
    beta, delta, e, elapsed = inverse_stable_samples
    sqrt_n = math.sqrt(e.size)
    m1 = stable_inverse_moment(beta, 1, 1.0)
    m2 = stable_inverse_moment(beta, 2, 1.0)
    assert m1 == pytest.approx(1.0 / math.gamma(1.9), rel=1e-14)
    mc1, se1 = e.mean(), e.std(ddof=1) / sqrt_n
    mc2, se2 = (e**2).mean(), (e**2).std(ddof=1) / sqrt_n
    ok1 = m1 - delta - 3 * se1 <= mc1 <= m1 + 3 * se1
    # E^2 - E_delta^2 <= 2 delta E
    ok2 = m2 - 2 * delta * m1 - 3 * se2 <= mc2 <= m2 + 3 * se2
    ok = ok1 and ok2 and elapsed < 60.0
    record(4, ok, f"n=1: {mc1:.5f} vs {m1:.5f} (SE {se1:.1e}); "
                  f"n=2: {mc2:.5f} vs {m2:.5f} (SE {se2:.1e}); {elapsed:.1f} s (< 60)")
    assert ok


def test_criterion_05_euler_strong_order():
    gbm = preset("gbm")
    deltas = [2.0**-k for k in range(4, 10)]
    errs = []
    for j, delta in enumerate(deltas):
        steps = round(1.0 / delta)
        d = np.empty(1000)
        for i in range(d.size):
            path = euler_maruyama(gbm, [1.0], delta, steps, make_stream(SEED, 5, j, i))
            d[i] = abs(gbm_exact(path.brownian_cumulative, delta, steps) - path.grid_values[-1, 0])
        errs.append(d.mean())
    slope, _ = fit_loglog(zip(deltas, errs))
    ok = 0.35 <= slope <= 0.65
    record(5, ok, f"strong slope {slope:.4f} in [0.35, 0.65]")
    assert ok


def test_criterion_06_tempered_gbm_study(study_report):
    report, elapsed = study_report
    ok_strong = 0.35 <= report.strong_slope <= 0.75
    ok_weak = 0.7 <= report.weak_slope <= 1.5
    ok = ok_strong and ok_weak and elapsed < 300.0
    noise = ", ".join(f"{r.wkerr / r.wkerr_stderr:.2f}" for r in report.rows)
    record(6, ok, f"strong slope {report.strong_slope:.4f} in [0.35, 0.75] "
                  f"({'ok' if ok_strong else 'out'}); weak slope {report.weak_slope:.4f} "
                  f"in [0.7, 1.5] ({'ok' if ok_weak else 'out'}); WKERR/SE per delta: "
                  f"{noise}; {elapsed:.1f} s (< 300)")
    assert ok


def test_criterion_07_weak_below_strong(study_report, study):
    report, _ = study_report
    small = run_convergence_study(StudyConfig(study, preset="linear-drift-gbm",
                                              preset_params={"mu": 0.5}, n_paths=50,
                                              master_seed=SEED + 7))
    rows = report.rows + small.rows
    bad = sum(r.wkerr > r.sterr for r in rows)
    ok = bad == 0
    record(7, ok, f"{bad} violations over {len(rows)} report rows")
    assert ok


def test_criterion_08_determinism(tmp_path):
    cfg = load_config(CONFIGS / "tempered_convergence.yaml")
    outputs = []
    for k, workers in enumerate((1, 1, 3)):
        cfg.convergence.workers = workers
        out = tmp_path / f"run{k}"
        out.mkdir()
        cmd_convergence(cfg, out)
        outputs.append((out / "convergence.csv").read_bytes())
    same = outputs[0] == outputs[1]
    same_parallel = outputs[0] == outputs[2]
    ok = same and same_parallel
    record(8, ok, f"rerun identical: {same}; workers 1 vs 3 identical: {same_parallel}")
    assert ok


def test_criterion_09_mittag_leffler(inverse_stable_samples):
    zs = np.linspace(-5.0, 5.0, 201)
    rel = max(abs(mittag_leffler(1.0, z) / math.exp(z) - 1.0) for z in zs)
    beta, delta, e, _ = inverse_stable_samples
    lam = 0.5
    target = mittag_leffler(beta, lam)
    w = np.exp(lam * e)
    mc, se = w.mean(), w.std(ddof=1) / math.sqrt(w.size)
    # E - delta <= E_delta <= E, so exp(lam E_delta) >= exp(-lam delta) exp(lam E)
    lo = math.exp(-lam * delta) * target - 3 * se
    hi = target + 3 * se
    ok = rel <= 1e-10 and lo <= mc <= hi
    record(9, ok, f"max rel |E_1 - exp| {rel:.1e} (<= 1e-10); "
                  f"E[exp(0.5 E_delta(1))] = {mc:.5f} in [{lo:.5f}, {hi:.5f}]")
    assert ok


def test_criterion_10_uniform_trend(study):
    deltas = (2.0**-4, 2.0**-6, 2.0**-8)
    cfg = StudyConfig(study, preset="gbm", deltas=deltas, n_paths=300, master_seed=SEED + 10)
    medians = [float(np.median(sup_error_samples(cfg, d))) for d in deltas]
    ok = medians[0] > medians[1] > medians[2]
    record(10, ok, "median sup error " + " > ".join(f"{m:.4f}" for m in medians))
    assert ok
