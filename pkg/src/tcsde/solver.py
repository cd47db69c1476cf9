"""Approximation ``Y_delta = X_delta o E_delta`` of the time-changed SDE.

Recipe, for a step ``delta`` and horizon ``T``:

1. simulate ``D`` on ``{0, delta, 2 delta, ...}`` until it passes ``T``,
   which fixes ``N`` with ``D(N delta) <= T < D((N+1) delta)``;
2. run Euler-Maruyama for the parent SDE on ``{0, delta, ..., N delta}``;
3. set ``Y_delta(t) = X_delta(n delta)`` for ``t`` in ``[D(n delta), D((n+1) delta))``.

``D`` and ``B`` are drawn from two labelled sub-streams of the caller's
generator, so they are independent and reordering one never shifts the other.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from numpy.random import Generator

from .errors import DomainError, UnsupportedError
from .rng import BROWNIAN, SUBORDINATOR, substream
from .sde import CoefficientField, EulerPath, euler_maruyama
from .subordinator import SubordinatorSpec, simulate_path_until
from .timechange import TimeChangePath, build_time_change


@dataclass(frozen=True)
class TimeChangedPath:
    delta: float
    horizon: float
    euler: EulerPath = field(repr=False)
    time_change: TimeChangePath = field(repr=False)
    sample_times: np.ndarray = field(repr=False)
    levels: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    @property
    def stop_index(self) -> int:
        return self.time_change.stop_index

    @property
    def terminal_value(self) -> np.ndarray:
        return self.euler.grid_values[self.stop_index]


class CoupledPair(NamedTuple):
    approx_at_T: np.ndarray
    near_exact_at_T: np.ndarray


def default_sample_times(tc: TimeChangePath) -> np.ndarray:
    """Jump times ``D(0), ..., D(N delta)`` of ``E_delta`` followed by ``T``."""
    jumps = tc.jump_times[: tc.stop_index + 1]
    if jumps[-1] == tc.horizon:
        return np.array(jumps)
    return np.append(jumps, tc.horizon)


def _simulate(spec, coeffs, y0, delta, horizon, rng):
    sub = simulate_path_until(spec, delta, horizon, substream(rng, SUBORDINATOR))
    tc = build_time_change(sub)
    euler = euler_maruyama(coeffs, y0, delta, tc.stop_index, substream(rng, BROWNIAN))
    return tc, euler


def simulate_time_changed(spec: SubordinatorSpec, coeffs: CoefficientField, y0,
                          delta: float, horizon: float,
                          sample_times: Optional[np.ndarray] = None,
                          rng: Optional[Generator] = None) -> TimeChangedPath:
    """One path of ``Y_delta`` on ``[0, horizon]``, reported at ``sample_times``.

    ``sample_times`` must be sorted and inside ``[0, horizon]``; by default
    the jump times of ``E_delta`` plus the horizon are used.
    """
    if rng is None:
        raise DomainError("simulate_time_changed needs an explicit rng")
    tc, euler = _simulate(spec, coeffs, y0, delta, horizon, rng)
    if sample_times is None:
        ts = default_sample_times(tc)
    else:
        ts = np.asarray(sample_times, dtype=float).reshape(-1)
        if ts.size and np.any(np.diff(ts) < 0):
            raise DomainError("sample_times must be sorted")
    levels = np.asarray(tc.level(ts), dtype=np.int64).reshape(-1)
    return TimeChangedPath(delta, horizon, euler, tc, ts, levels, euler.grid_values[levels])


def _coupled(spec, coeffs, y0, delta, horizon, rng):
    if coeffs.exact is None:
        raise UnsupportedError(f"coefficient field {coeffs.name!r} has no exact parent solution")
    return _simulate(spec, coeffs, y0, delta, horizon, rng)


def exact_on_grid(coeffs, euler, y0, stop):
    y0 = np.asarray(y0, dtype=float).reshape(-1)
    return np.array([
        np.asarray(coeffs.exact(n * euler.delta, euler.brownian_cumulative[n], y0),
                   dtype=float).reshape(-1)
        for n in range(stop + 1)
    ])


def coupled_terminal(spec: SubordinatorSpec, coeffs: CoefficientField, y0,
                     delta: float, horizon: float, rng: Generator):
    """Like :func:`simulate_coupled_pair` but also returns the stop index ``N``."""
    tc, euler = _coupled(spec, coeffs, y0, delta, horizon, rng)
    n = tc.stop_index
    y0 = np.asarray(y0, dtype=float).reshape(-1)
    exact = np.asarray(coeffs.exact(n * delta, euler.brownian_cumulative[n], y0),
                       dtype=float).reshape(-1)
    return euler.grid_values[n].copy(), exact, n


def simulate_coupled_pair(spec: SubordinatorSpec, coeffs: CoefficientField, y0,
                          delta: float, horizon: float, rng: Generator) -> CoupledPair:
    """``(X_delta(E_delta(T)), X(E_delta(T)))`` on one shared ``(B, D)`` realization."""
    approx, exact, _ = coupled_terminal(spec, coeffs, y0, delta, horizon, rng)
    return CoupledPair(approx, exact)


def coupled_sup_error(spec: SubordinatorSpec, coeffs: CoefficientField, y0,
                      delta: float, horizon: float, rng: Generator) -> float:
    """``sup_{t <= T} |X(E_delta(t)) - X_delta(E_delta(t))|``.

    ``E_delta`` only visits the levels ``0, delta, ..., N delta`` on ``[0, T]``
    so the supremum is a maximum over those grid points.
    """
    tc, euler = _coupled(spec, coeffs, y0, delta, horizon, rng)
    n = tc.stop_index
    diff = exact_on_grid(coeffs, euler, y0, n) - euler.grid_values[: n + 1]
    return float(np.max(np.linalg.norm(diff, axis=1)))
