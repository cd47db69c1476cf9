"""Monte Carlo study of strong and weak errors at the horizon.

For each step ``delta`` in a grid, ``n_paths`` coupled realizations of the
near-exact value ``X(E_delta(T))`` and the approximation ``X_delta(E_delta(T))``
are drawn and summarized as

    STERR(delta) = mean_i |X(E_delta(T))_i - X_delta(E_delta(T))_i|
    WKERR(delta) = |mean_i g(X(E_delta(T))_i) - mean_i g(X_delta(E_delta(T))_i)|

Orders are the slopes of least-squares lines through ``(log2 delta, log2 err)``.

Path ``i`` at grid position ``j`` always uses the stream keyed
``(master_seed, j, i)``, so a report does not depend on how paths are
distributed over worker processes.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping, Sequence, Union

import numpy as np

from .errors import DomainError
from .rng import make_stream
from .sde import CoefficientField, preset
from .solver import coupled_sup_error, coupled_terminal
from .subordinator import SubordinatorSpec

log = logging.getLogger(__name__)

DEFAULT_DELTAS = tuple(2.0**-k for k in range(4, 10))
CSV_COLUMNS = ("delta", "sterr", "sterr_stderr", "wkerr", "wkerr_stderr", "mean_N")
WEAK_FUNCTIONS = {"identity": lambda x: x}


@dataclass(frozen=True)
class StudyConfig:
    spec: SubordinatorSpec
    preset: Union[str, CoefficientField] = "gbm"
    preset_params: Mapping[str, float] = field(default_factory=dict)
    y0: Sequence[float] = (1.0,)
    horizon: float = 1.0
    deltas: Sequence[float] = DEFAULT_DELTAS
    n_paths: int = 300
    master_seed: int = 0
    weak_function: str = "identity"
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "deltas", tuple(float(d) for d in self.deltas))
        object.__setattr__(self, "y0", tuple(float(v) for v in np.ravel(self.y0)))
        if not self.deltas:
            raise DomainError("deltas must be non-empty")
        if any(not 0.0 < d < 1.0 for d in self.deltas):
            raise DomainError(f"every delta must lie in (0, 1), got {self.deltas}")
        if any(a <= b for a, b in zip(self.deltas, self.deltas[1:])):
            raise DomainError(f"deltas must be strictly decreasing, got {self.deltas}")
        if self.n_paths < 2:
            raise DomainError(f"n_paths must be at least 2, got {self.n_paths}")
        if not self.horizon > 0.0:
            raise DomainError(f"horizon must be positive, got {self.horizon}")
        if not 0 <= self.master_seed < 2**64:
            raise DomainError(f"master_seed must be an unsigned 64-bit integer, got {self.master_seed}")
        if self.weak_function not in WEAK_FUNCTIONS:
            raise DomainError(f"weak_function must be one of {sorted(WEAK_FUNCTIONS)}")
        if self.workers < 1:
            raise DomainError(f"workers must be >= 1, got {self.workers}")
        if self.workers > 1 and not isinstance(self.preset, str):
            raise DomainError("parallel studies need a named preset (callables do not pickle)")

    def coefficients(self) -> CoefficientField:
        if isinstance(self.preset, CoefficientField):
            return self.preset
        return preset(self.preset, **dict(self.preset_params))

    def echo(self) -> dict:
        return {
            "spec": {k: (v.value if hasattr(v, "value") else v) for k, v in asdict(self.spec).items()},
            "preset": self.preset if isinstance(self.preset, str) else self.preset.name,
            "preset_params": dict(self.preset_params),
            "y0": list(self.y0),
            "horizon": self.horizon,
            "deltas": list(self.deltas),
            "n_paths": self.n_paths,
            "master_seed": self.master_seed,
            "weak_function": self.weak_function,
        }


@dataclass(frozen=True)
class ConvergenceRow:
    delta: float
    sterr: float
    sterr_stderr: float
    wkerr: float
    wkerr_stderr: float
    mean_N: float


@dataclass
class ConvergenceReport:
    rows: list[ConvergenceRow]
    strong_slope: float
    strong_intercept: float
    weak_slope: float
    weak_intercept: float
    metadata: dict = field(default_factory=dict)
    flags: list[str] = field(default_factory=list)

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            for r in self.rows:
                w.writerow([repr(float(getattr(r, c))) for c in CSV_COLUMNS])
        return path

    def summary(self) -> dict:
        return {
            "strong_slope": _json_float(self.strong_slope),
            "strong_intercept": _json_float(self.strong_intercept),
            "weak_slope": _json_float(self.weak_slope),
            "weak_intercept": _json_float(self.weak_intercept),
            "flags": list(self.flags),
            "metadata": self.metadata,
        }

    def write_summary(self, path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.summary(), indent=2, sort_keys=True) + "\n")
        return path


def _json_float(x):
    return None if not math.isfinite(x) else x


def fit_loglog(points) -> tuple[float, float]:
    """Least-squares line through ``(log2 delta, log2 err)``.

    Points with ``err <= 0`` are dropped with a warning. If fewer than two
    points remain the slope and intercept are NaN.
    """
    pts = [(float(d), float(e)) for d, e in points]
    if len(pts) < 2:
        raise DomainError(f"fit_loglog needs at least two points, got {len(pts)}")
    if any(not d > 0.0 for d, _ in pts):
        raise DomainError("delta values must be positive")
    kept = [(d, e) for d, e in pts if e > 0.0]
    if len(kept) < len(pts):
        warnings.warn(f"fit_loglog: dropped {len(pts) - len(kept)} point(s) with err <= 0",
                      RuntimeWarning, stacklevel=2)
    if len(kept) < 2:
        return math.nan, math.nan
    x = np.log2([d for d, _ in kept])
    y = np.log2([e for _, e in kept])
    if np.ptp(x) == 0.0:
        return math.nan, math.nan
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


def _delta_index(config: StudyConfig, delta: float) -> int:
    try:
        return config.deltas.index(float(delta))
    except ValueError:
        raise DomainError(f"delta {delta} is not in the study grid {config.deltas}") from None


def _pair_chunk(args):
    config, j, lo, hi = args
    coeffs = config.coefficients()
    delta = config.deltas[j]
    out = []
    for i in range(lo, hi):
        rng = make_stream(config.master_seed, j, i)
        approx, exact, n = coupled_terminal(config.spec, coeffs, config.y0, delta,
                                            config.horizon, rng)
        out.append((approx, exact, n))
    return out


def _chunks(n, parts):
    step = -(-n // parts)
    return [(lo, min(lo + step, n)) for lo in range(0, n, step)]


def simulate_pairs(config: StudyConfig, delta: float, executor=None):
    """Coupled terminal values for every path at one ``delta``.

    Returns arrays ``approx`` and ``exact`` of shape ``(n_paths, d)`` and the
    stop indices, always in path order.
    """
    j = _delta_index(config, delta)
    if executor is None or config.workers == 1:
        results = _pair_chunk((config, j, 0, config.n_paths))
    else:
        tasks = [(config, j, lo, hi) for lo, hi in _chunks(config.n_paths, 4 * config.workers)]
        results = [r for chunk in executor.map(_pair_chunk, tasks) for r in chunk]
    approx = np.array([r[0] for r in results])
    exact = np.array([r[1] for r in results])
    stops = np.array([r[2] for r in results])
    return approx, exact, stops


def _errors(config, approx, exact):
    n = config.n_paths
    abs_err = np.linalg.norm(exact - approx, axis=1)
    sterr = float(abs_err.mean())
    sterr_se = float(abs_err.std(ddof=1) / math.sqrt(n))
    g = WEAK_FUNCTIONS[config.weak_function]
    diff = g(exact) - g(approx)
    wkerr = float(np.linalg.norm(diff.mean(axis=0)))
    wkerr_se = float(math.sqrt(diff.var(axis=0, ddof=1).sum() / n))
    return sterr, sterr_se, wkerr, wkerr_se


def strong_error(config: StudyConfig, delta: float) -> tuple[float, float]:
    """``(STERR(delta), standard error)``."""
    approx, exact, _ = simulate_pairs(config, delta)
    sterr, se, _, _ = _errors(config, approx, exact)
    return sterr, se


def weak_error(config: StudyConfig, delta: float) -> tuple[float, float]:
    """``(WKERR(delta), standard error of the mean difference)``."""
    approx, exact, _ = simulate_pairs(config, delta)
    _, _, wkerr, se = _errors(config, approx, exact)
    return wkerr, se


def run_convergence_study(config: StudyConfig) -> ConvergenceReport:
    """Errors on every ``delta`` of the grid plus fitted log2-log2 slopes."""
    started = time.perf_counter()
    rows = []
    executor = ProcessPoolExecutor(config.workers) if config.workers > 1 else None
    try:
        for delta in config.deltas:
            approx, exact, stops = simulate_pairs(config, delta, executor)
            sterr, sterr_se, wkerr, wkerr_se = _errors(config, approx, exact)
            rows.append(ConvergenceRow(delta, sterr, sterr_se, wkerr, wkerr_se,
                                       float(stops.mean())))
            log.info("delta=%g sterr=%.4g wkerr=%.4g mean_N=%.1f",
                     delta, sterr, wkerr, stops.mean())
    finally:
        if executor is not None:
            executor.shutdown()

    flags = []
    fits = {}
    for name in ("sterr", "wkerr"):
        pts = [(r.delta, getattr(r, name)) for r in rows]
        if len(pts) < 2:
            fits[name] = (math.nan, math.nan)
        else:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                fits[name] = fit_loglog(pts)
        if not math.isfinite(fits[name][0]):
            flags.append(f"{'strong' if name == 'sterr' else 'weak'}_slope_undefined")

    metadata = {
        "config": config.echo(),
        "workers": config.workers,
        "elapsed_seconds": round(time.perf_counter() - started, 3),
    }
    return ConvergenceReport(rows, *fits["sterr"], *fits["wkerr"], metadata=metadata, flags=flags)


def sup_error_samples(config: StudyConfig, delta: float) -> np.ndarray:
    """Per-path ``sup_t |X(E_delta(t)) - X_delta(E_delta(t))|`` on the study streams."""
    j = _delta_index(config, delta)
    coeffs = config.coefficients()
    return np.array([
        coupled_sup_error(config.spec, coeffs, config.y0, delta, config.horizon,
                          make_stream(config.master_seed, j, i))
        for i in range(config.n_paths)
    ])
