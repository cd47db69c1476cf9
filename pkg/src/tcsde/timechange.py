"""Discretized inverse subordinator and inverse-stable moment formulas.

Given ``D`` on the grid ``{0, delta, 2 delta, ...}`` the step process

    E_delta(t) = n * delta   for  t in [D(n delta), D((n+1) delta))

approximates the first-passage time ``E(t) = inf{u > 0 : D(u) > t}`` from
below, with ``E(t) - delta <= E_delta(t) <= E(t)``. Levels are kept as integer
indices ``n`` so that composing with an Euler grid needs no float rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.random import Generator
from scipy.special import gammaln

from .errors import DomainError, NumericError
from .subordinator import (
    SubordinatorPath,
    SubordinatorSpec,
    append_increments,
    grow_until,
)

ML_RTOL = 1e-14
ML_MAX_TERMS = 10_000
ML_MAX_ABS_Z = 500.0


@dataclass(frozen=True)
class TimeChangePath:
    delta: float
    jump_times: np.ndarray = field(repr=False)
    horizon: float
    stop_index: int

    def level(self, t) -> np.ndarray | int:
        """Integer ``n`` with ``E_delta(t) = n * delta``; accepts scalars or arrays."""
        ts = np.asarray(t, dtype=float)
        if np.any(ts < 0.0) or np.any(ts > self.horizon) or np.any(np.isnan(ts)):
            raise DomainError(f"E_delta is evaluated on [0, {self.horizon}], got {t}")
        # side="right": a time equal to a jump time maps to the new level
        n = np.searchsorted(self.jump_times, ts, side="right") - 1
        return int(n) if n.ndim == 0 else n

    def __call__(self, t):
        return evaluate(self, t)

    @property
    def terminal_value(self) -> float:
        return self.stop_index * self.delta

    def constancy_intervals(self) -> list[tuple[float, float]]:
        """Intervals ``[D(n delta), min(D((n+1) delta), T))`` on which ``E_delta`` is flat."""
        d = self.jump_times
        n = self.stop_index
        ends = np.minimum(d[1:n + 2], self.horizon)
        return [(float(d[k]), float(ends[k])) for k in range(n + 1)]


def build_time_change(path: SubordinatorPath) -> TimeChangePath:
    return TimeChangePath(path.delta, path.values, path.horizon, path.stop_index)


def evaluate(tc: TimeChangePath, t):
    """``E_delta(t)`` for ``t`` in ``[0, T]`` (scalar or array)."""
    n = tc.level(t)
    return n * tc.delta


def coupled_time_changes(spec: SubordinatorSpec, delta: float, horizon: float,
                         rng: Generator) -> tuple[TimeChangePath, TimeChangePath]:
    """``(E_delta, E_{delta/2})`` built from one realization of ``D``.

    ``D`` is simulated on the fine grid and the coarse path reuses every
    second point, so both step functions bound the same ``E``.
    """
    fine = delta / 2.0
    values = grow_until(spec, fine, horizon, rng)
    n_fine = values.size - 2
    if values.size % 2 == 0:
        # coarse grid needs one more fine step to pass the horizon
        values = append_increments(values, spec, fine, 1, rng)
    coarse = values[::2]
    n_coarse = coarse.size - 2
    return (
        build_time_change(SubordinatorPath(delta, coarse, horizon, n_coarse)),
        build_time_change(SubordinatorPath(fine, values[: n_fine + 2], horizon, n_fine)),
    )


def stable_inverse_moment(beta: float, n: int, t: float, scale: float = 1.0) -> float:
    """``E[E(t)^n] = n! t^(n beta) / Gamma(n beta + 1)`` for the inverse stable subordinator.

    ``scale`` is the constant ``c`` in ``psi(s) = c s^beta``; it rescales the
    inverse as ``E(t) / c``.
    """
    if not 0.0 < beta < 1.0:
        raise DomainError(f"beta must lie in (0, 1), got {beta}")
    if int(n) != n or n < 1:
        raise DomainError(f"moment order must be a positive integer, got {n}")
    if not t >= 0.0:
        raise DomainError(f"t must be >= 0, got {t}")
    if not scale > 0.0:
        raise DomainError(f"scale must be positive, got {scale}")
    if t == 0.0:
        return 0.0
    n = int(n)
    logm = (math.lgamma(n + 1) + n * beta * math.log(t)
            - math.lgamma(n * beta + 1) - n * math.log(scale))
    return math.exp(logm)


def mittag_leffler(beta: float, z: float) -> float:
    """One-parameter Mittag-Leffler function ``sum_n z^n / Gamma(n beta + 1)``.

    Truncated power series, stopped once a term drops below ``1e-14`` times the
    partial sum while terms are decreasing. Meant for moderate ``|z|``: for
    large negative ``z`` the alternating series loses accuracy to cancellation.
    """
    if not 0.0 < beta <= 1.0:
        raise DomainError(f"beta must lie in (0, 1], got {beta}")
    if not math.isfinite(z) or abs(z) > ML_MAX_ABS_Z:
        raise DomainError(f"|z| must be at most {ML_MAX_ABS_Z}, got {z}")
    if z == 0.0:
        return 1.0
    logz = math.log(abs(z))
    sign = -1.0 if z < 0 else 1.0
    terms = []
    total = 0.0
    prev = math.inf
    for n in range(ML_MAX_TERMS):
        try:
            mag = math.exp(n * logz - gammaln(n * beta + 1.0))
        except OverflowError:
            raise NumericError(f"Mittag-Leffler series overflows for beta={beta}, z={z}") from None
        term = mag if (sign > 0 or n % 2 == 0) else -mag
        terms.append(term)
        total += term
        if n > 0 and mag < prev and mag < ML_RTOL * abs(total):
            return math.fsum(terms)
        prev = mag
    raise NumericError(f"Mittag-Leffler series for beta={beta}, z={z} did not converge "
                       f"in {ML_MAX_TERMS} terms")
