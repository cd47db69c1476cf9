"""Command-line driver: ``tcsde {simulate-path,convergence,moments} --config FILE``.

Exit codes: 0 success, 2 validation error, 3 numeric failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, load_config
from .errors import ConfigError, DomainError, NumericError, ResourceError, UnsupportedError
from .harness import StudyConfig, run_convergence_study
from .rng import make_stream
from .sde import preset
from .solver import exact_on_grid, simulate_time_changed
from .subordinator import Family, simulate_path_until
from .timechange import build_time_change, mittag_leffler, stable_inverse_moment

log = logging.getLogger("tcsde")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def _fmt(x) -> str:
    # repr of a Python float is locale independent and round-trips
    return repr(float(x))


def _write_csv(path: Path, header, rows) -> Path:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else _fmt(v) for v in row])
    return path


def _value_header(d: int) -> list[str]:
    return ["y"] if d == 1 else [f"y_{k}" for k in range(d)]


def cmd_simulate_path(cfg: ExperimentConfig, out: Path) -> list[Path]:
    """Write ``time_change.csv``, ``approximation.csv`` and, if available, ``near_exact.csv``.

    All three are sampled at the jump times of ``E_delta`` plus ``T``, so the
    flat stretches of the three series coincide.
    """
    coeffs = preset(cfg.preset, **cfg.preset_params)
    delta = cfg.simulate_path.delta
    path = simulate_time_changed(cfg.spec, coeffs, cfg.y0, delta, cfg.horizon,
                                 rng=make_stream(cfg.seed))
    ts = path.sample_times
    header = ["t"] + _value_header(coeffs.dim_state)
    files = [
        _write_csv(out / "time_change.csv", ["t", "E_delta"],
                   zip(ts, path.levels * delta)),
        _write_csv(out / "approximation.csv", header,
                   ([t, *v] for t, v in zip(ts, path.values))),
    ]
    if coeffs.exact is not None:
        exact = exact_on_grid(coeffs, path.euler, cfg.y0, path.stop_index)
        files.append(_write_csv(out / "near_exact.csv", header,
                                ([t, *exact[n]] for t, n in zip(ts, path.levels))))
    log.info("simulate-path: N=%d, %d sample times", path.stop_index, ts.size)
    return files


def cmd_convergence(cfg: ExperimentConfig, out: Path) -> list[Path]:
    """Run the STERR/WKERR study; write ``convergence.csv`` and ``convergence_summary.json``."""
    coeffs = preset(cfg.preset, **cfg.preset_params)
    if coeffs.exact is None:
        raise UnsupportedError(f"preset {cfg.preset!r} has no exact solution to compare against")
    study = StudyConfig(
        spec=cfg.spec, preset=cfg.preset, preset_params=cfg.preset_params, y0=cfg.y0,
        horizon=cfg.horizon, deltas=cfg.convergence.deltas, n_paths=cfg.convergence.n_paths,
        master_seed=cfg.seed, workers=cfg.convergence.workers,
    )
    report = run_convergence_study(study)
    files = [report.to_csv(out / "convergence.csv"),
             report.write_summary(out / "convergence_summary.json")]
    log.info("convergence: strong slope %.4f, weak slope %.4f",
             report.strong_slope, report.weak_slope)
    return files


MOMENT_COLUMNS = ("quantity", "param", "t", "analytic", "mc_mean", "mc_stderr",
                  "band_low", "band_high", "within_band")


def moment_table(cfg: ExperimentConfig) -> list[tuple]:
    """Analytic inverse-stable moments next to Monte Carlo moments of ``E_delta``.

    The band accounts for the one-sided bias ``E - delta <= E_delta <= E``:
    ``E^n - E_delta^n <= n delta E^(n-1)`` for power moments, and
    ``exp(lam E_delta)`` lies between ``exp(lam E)`` and ``exp(lam (E - delta))``.
    Analytic values exist only for the stable family; otherwise those columns are NaN.
    """
    m = cfg.moments
    spec = cfg.spec
    times = np.array(m.times)
    t_max = float(times.max())
    samples = np.zeros((m.n_paths, times.size))
    if t_max > 0.0:
        for i in range(m.n_paths):
            tc = build_time_change(simulate_path_until(spec, m.delta, t_max,
                                                       make_stream(cfg.seed, 0, i)))
            samples[i] = tc.level(times) * m.delta
    analytic_ok = spec.family is Family.STABLE and spec.drift == 0.0
    sqrt_n = math.sqrt(m.n_paths)

    def row(quantity, param, t, analytic, values, low_bias, high_bias):
        mean = float(values.mean())
        se = float(values.std(ddof=1) / sqrt_n)
        lo, hi = analytic - low_bias - 3 * se, analytic + high_bias + 3 * se
        within = "" if math.isnan(analytic) else str(bool(lo <= mean <= hi)).lower()
        return (quantity, float(param), float(t), analytic, mean, se, lo, hi, within)

    rows = []
    for n in m.orders:
        for k, t in enumerate(times):
            if analytic_ok:
                mom = stable_inverse_moment(spec.beta, n, t, spec.scale)
                prev = 1.0 if n == 1 else stable_inverse_moment(spec.beta, n - 1, t, spec.scale)
                bias = n * m.delta * prev
            else:
                mom = bias = math.nan
            rows.append(row("moment", n, t, mom, samples[:, k] ** n, bias, 0.0))
    if m.exp_lambda is not None:
        lam = m.exp_lambda
        for k, t in enumerate(times):
            if analytic_ok:
                ml = mittag_leffler(spec.beta, lam * t**spec.beta / spec.scale)
                # exp(lam E_delta) vs exp(lam E): off by at most a factor exp(-lam delta)
                gap = abs(1.0 - math.exp(-lam * m.delta)) * ml
                low, high = (gap, 0.0) if lam >= 0 else (0.0, math.exp(-lam * m.delta) * ml - ml)
            else:
                ml = low = high = math.nan
            rows.append(row("exp_moment", lam, t, ml, np.exp(lam * samples[:, k]), low, high))
    return rows


def cmd_moments(cfg: ExperimentConfig, out: Path) -> list[Path]:
    rows = moment_table(cfg)
    return [_write_csv(out / "moments.csv", MOMENT_COLUMNS, rows)]


COMMANDS = {
    "simulate-path": cmd_simulate_path,
    "convergence": cmd_convergence,
    "moments": cmd_moments,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, type=Path, help="YAML experiment config")
    common.add_argument("--seed", type=int, default=None, help="override the config seed (u64)")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--quiet", action="store_true", help="only report errors")
    common.add_argument("--workers", type=int, default=None,
                        help="process count for the convergence study")

    parser = argparse.ArgumentParser(
        prog="tcsde", description="Simulate SDEs driven by a time-changed Brownian motion.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate-path", parents=[common], help="one path of E_delta, X_delta o E_delta, X o E_delta")
    sub.add_parser("convergence", parents=[common], help="strong/weak error study over a delta grid")
    sub.add_parser("moments", parents=[common], help="inverse-stable moments vs Monte Carlo")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION

    logging.basicConfig(level=logging.ERROR if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("--seed", f"expected an unsigned 64-bit integer, got {args.seed}")
            cfg.seed = args.seed
        if args.workers is not None:
            if args.workers < 1:
                raise ConfigError("--workers", f"must be >= 1, got {args.workers}")
            cfg.convergence.workers = args.workers
        args.out.mkdir(parents=True, exist_ok=True)
        files = COMMANDS[args.command](cfg, args.out)
    except (ConfigError, DomainError, UnsupportedError) as exc:
        print(f"tcsde: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericError, ResourceError, FloatingPointError) as exc:
        print(f"tcsde: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"tcsde: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    if not args.quiet:
        for f in files:
            print(f)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
