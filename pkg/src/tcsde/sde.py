"""Parent Ito SDE ``dX = b(t, X) dt + sigma(t, X) dB`` and its Euler-Maruyama scheme.

Only grid values ``X_delta(n delta)`` are produced; the scheme is never
interpolated between grid points since downstream composition with
``E_delta`` only ever asks for grid indices.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.random import Generator

from .errors import DomainError, NumericError

Drift = Callable[[float, np.ndarray], np.ndarray]
Diffusion = Callable[[float, np.ndarray], np.ndarray]
# exact(t, B(t), y0) -> X(t) on the same Brownian realization
ExactSolution = Callable[[float, np.ndarray, np.ndarray], np.ndarray]

# finiteness of the iterates is verified in blocks of this many steps
_CHECK_EVERY = 64


@dataclass(frozen=True)
class CoefficientField:
    """Drift and diffusion of the parent SDE plus declared regularity constants.

    ``lipschitz_K`` and ``holder_gamma`` are metadata: at construction the
    Lipschitz and linear-growth bounds are spot-checked on random points and
    any violation is reported as a :class:`RuntimeWarning` (and kept in
    ``violations``), never raised.
    """

    dim_state: int
    dim_noise: int
    drift: Drift
    diffusion: Diffusion
    lipschitz_K: float
    holder_gamma: float = 1.0
    autonomous: bool = True
    name: str = "custom"
    exact: Optional[ExactSolution] = field(default=None, compare=False)
    violations: tuple = field(default=(), init=False, compare=False, repr=False)

    def __post_init__(self):
        if self.dim_state < 1 or self.dim_noise < 1:
            raise DomainError(f"dimensions must be positive, got d={self.dim_state}, m={self.dim_noise}")
        if not self.lipschitz_K > 0.0:
            raise DomainError(f"lipschitz_K must be positive, got {self.lipschitz_K}")
        if not self.holder_gamma > 0.0:
            raise DomainError(f"holder_gamma must be positive, got {self.holder_gamma}")
        found = tuple(self.spot_check())
        object.__setattr__(self, "violations", found)
        for msg in found[:3]:
            warnings.warn(f"coefficient field {self.name!r}: {msg}", RuntimeWarning, stacklevel=3)

    def b(self, t: float, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.drift(t, x), dtype=float).reshape(self.dim_state)

    def sigma(self, t: float, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.diffusion(t, x), dtype=float).reshape(self.dim_state, self.dim_noise)

    def spot_check(self, n_points: int = 32, seed: int = 0):
        """Yield messages for sampled points breaking the Lipschitz or growth bound."""
        d, m = self.dim_state, self.dim_noise
        rng = np.random.default_rng(seed)
        for t, x in [(0.0, np.zeros(d)), (1.0, rng.normal(size=d))]:
            bx = np.asarray(self.drift(t, x), dtype=float)
            sx = np.asarray(self.diffusion(t, x), dtype=float)
            if bx.size != d or sx.size != d * m:
                raise DomainError(
                    f"coefficient shapes: drift gives {bx.shape} (want ({d},)), "
                    f"diffusion gives {sx.shape} (want ({d}, {m}))"
                )
        K = self.lipschitz_K * (1.0 + 1e-9)
        for _ in range(n_points):
            t = float(rng.uniform(0.0, 5.0))
            x, y = rng.normal(scale=2.0, size=(2, d))
            lip = (np.linalg.norm(self.b(t, x) - self.b(t, y))
                   + np.linalg.norm(self.sigma(t, x) - self.sigma(t, y)))
            if lip > K * np.linalg.norm(x - y):
                yield f"Lipschitz bound K={self.lipschitz_K} fails at t={t:.3g}"
            growth = np.linalg.norm(self.b(t, x)) + np.linalg.norm(self.sigma(t, x))
            if growth > K * (1.0 + np.linalg.norm(x)):
                yield f"linear-growth bound K={self.lipschitz_K} fails at t={t:.3g}"


@dataclass(frozen=True)
class EulerPath:
    delta: float
    grid_values: np.ndarray = field(repr=False)
    brownian_cumulative: np.ndarray = field(repr=False)

    def __post_init__(self):
        if len(self.grid_values) != len(self.brownian_cumulative):
            raise DomainError("grid values and Brownian values must have equal length")

    @property
    def n_steps(self) -> int:
        return len(self.grid_values) - 1


def euler_maruyama(coeffs: CoefficientField, y0, delta: float, n_steps: int,
                   rng: Generator) -> EulerPath:
    """Euler-Maruyama grid values ``X_delta(0), ..., X_delta(n_steps * delta)``.

    Brownian increments are ``sqrt(delta) * rng.standard_normal`` (numpy's
    ziggurat sampler), drawn in one block of shape ``(n_steps, m)``.

    Raises
    ------
    NumericError
        If an iterate is NaN or infinite, naming the first such step. The
        check runs every few dozen steps, so a blow-up stops the loop early.
    """
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    if n_steps < 0:
        raise DomainError(f"n_steps must be >= 0, got {n_steps}")
    d, m = coeffs.dim_state, coeffs.dim_noise
    x = np.asarray(y0, dtype=float).reshape(-1)
    if x.size != d:
        raise DomainError(f"y0 has {x.size} components, the field has dim_state={d}")
    if not np.all(np.isfinite(x)):
        raise DomainError(f"y0 must be finite, got {y0}")

    db = math.sqrt(delta) * rng.standard_normal((n_steps, m))
    bm = np.zeros((n_steps + 1, m))
    np.cumsum(db, axis=0, out=bm[1:])
    xs = np.empty((n_steps + 1, d))
    xs[0] = x
    drift, diffusion = coeffs.drift, coeffs.diffusion
    checked = 0
    for n in range(n_steps):
        t = n * delta
        sig = np.asarray(diffusion(t, x), dtype=float).reshape(d, m)
        x = x + np.asarray(drift(t, x), dtype=float) * delta + sig @ db[n]
        xs[n + 1] = x
        if n - checked >= _CHECK_EVERY or n == n_steps - 1:
            _check_finite(xs, checked, n + 2, delta)
            checked = n + 1
    return EulerPath(delta, xs, bm)


def _check_finite(xs, lo, hi, delta):
    block = xs[lo:hi]
    bad = ~np.isfinite(block).all(axis=1)
    if bad.any():
        step = lo + int(np.argmax(bad))
        raise NumericError(f"Euler iterate is not finite at step {step} (t={step * delta:g})")


def gbm_exact(brownian_cumulative, delta: float, index: int) -> float:
    """``exp(B(index delta) - index delta / 2)``: the driftless unit GBM started at 1."""
    bm = np.asarray(brownian_cumulative, dtype=float)
    if not 0 <= index < len(bm):
        raise DomainError(f"index {index} outside 0..{len(bm) - 1}")
    return math.exp(float(bm[index].reshape(-1)[0]) - index * delta / 2.0)


# --- presets ---------------------------------------------------------------

def _gbm(sigma: float = 1.0) -> CoefficientField:
    sigma = float(sigma)

    def exact(t, b, y0):
        return y0 * np.exp(sigma * b - 0.5 * sigma**2 * t)

    return CoefficientField(
        1, 1,
        drift=lambda t, x: np.zeros(1),
        diffusion=lambda t, x: sigma * x.reshape(1, 1),
        lipschitz_K=max(abs(sigma), 1e-12), name="gbm", exact=exact,
    )


def _linear_drift_gbm(mu: float = 1.0, sigma: float = 1.0) -> CoefficientField:
    mu, sigma = float(mu), float(sigma)

    def exact(t, b, y0):
        return y0 * np.exp((mu - 0.5 * sigma**2) * t + sigma * b)

    return CoefficientField(
        1, 1,
        drift=lambda t, x: mu * x,
        diffusion=lambda t, x: sigma * x.reshape(1, 1),
        lipschitz_K=max(abs(mu) + abs(sigma), 1e-12), name="linear-drift-gbm", exact=exact,
    )


def _ou(theta: float = 1.0, mu: float = 0.0, sigma: float = 1.0) -> CoefficientField:
    theta, mu, sigma = float(theta), float(mu), float(sigma)
    return CoefficientField(
        1, 1,
        drift=lambda t, x: theta * (mu - x),
        diffusion=lambda t, x: np.full((1, 1), sigma),
        lipschitz_K=max(abs(theta), abs(theta * mu) + abs(sigma), 1e-12), name="ou",
    )


def _zero(dim: int = 1) -> CoefficientField:
    dim = int(dim)
    return CoefficientField(
        dim, dim,
        drift=lambda t, x: np.zeros(dim),
        diffusion=lambda t, x: np.zeros((dim, dim)),
        lipschitz_K=1.0, name="zero", exact=lambda t, b, y0: np.array(y0, dtype=float),
    )


PRESETS: dict[str, Callable[..., CoefficientField]] = {
    "gbm": _gbm,
    "linear-drift-gbm": _linear_drift_gbm,
    "ou": _ou,
    "zero": _zero,
}

PRESET_PARAMS = {
    "gbm": {"sigma"},
    "linear-drift-gbm": {"mu", "sigma"},
    "ou": {"theta", "mu", "sigma"},
    "zero": {"dim"},
}


def preset(name: str, **params) -> CoefficientField:
    """Named coefficient field.

    ``gbm``               b = 0, sigma(x) = sigma x (exact solution available)
    ``linear-drift-gbm``  b = mu x, sigma(x) = sigma x (exact solution available)
    ``ou``                b = theta (mu - x), sigma constant
    ``zero``              b = 0, sigma = 0 in ``dim`` dimensions (solution is y0)
    """
    try:
        factory = PRESETS[name]
    except KeyError:
        raise DomainError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    unknown = set(params) - PRESET_PARAMS[name]
    if unknown:
        raise DomainError(f"preset {name!r} takes no parameter(s) {sorted(unknown)}")
    return factory(**params)
