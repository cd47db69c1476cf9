"""Stable and exponentially tempered stable subordinators.

A subordinator ``D`` is described by its Laplace exponent

.. math::

    \\mathbb{E}[e^{-sD(t)}] = e^{-t\\psi(s)}, \\qquad
    \\psi(s) = a s + \\int_0^\\infty (1 - e^{-sx})\\,\\nu(dx).

Two families are supported, both with infinite Levy measure:

``Stable``
    ``psi(s) = a*s + c*s**beta``. The scale ``c`` multiplies the exponent
    directly, which corresponds to ``nu(dx) = c*beta/Gamma(1-beta) * x**(-1-beta) dx``.

``TemperedStable``
    ``nu(dx) = c * exp(-kappa*x) * x**(-1-beta) dx`` with ``kappa > 0``, giving
    ``psi(s) = a*s + c*Gamma(1-beta)/beta * ((s+kappa)**beta - kappa**beta)``.
    With ``c = normalized_scale(beta)`` this reduces to
    ``(s+kappa)**beta - kappa**beta``.

Increments are drawn exactly (no series truncation): the stable part uses
Kanter's representation and tempering is done by exponential rejection.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.random import Generator
from scipy import integrate

from .errors import DomainError, ResourceError

log = logging.getLogger(__name__)

MAX_STEPS = 10**9
_FIRST_BATCH = 256
_MAX_BATCH = 1 << 20


class Family(str, enum.Enum):
    STABLE = "stable"
    TEMPERED_STABLE = "tempered_stable"


def normalized_scale(beta: float) -> float:
    """Levy-measure constant that makes the tempered exponent ``(s+k)^b - k^b``."""
    return beta / math.gamma(1.0 - beta)


@dataclass(frozen=True)
class SubordinatorSpec:
    family: Family
    beta: float
    kappa: float = 0.0
    drift: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not 0.0 < self.beta < 1.0:
            raise DomainError(f"beta must lie in (0, 1), got {self.beta}")
        if not self.drift >= 0.0:
            raise DomainError(f"drift must be >= 0, got {self.drift}")
        if not self.scale > 0.0 or not math.isfinite(self.scale):
            raise DomainError(f"scale must be a positive finite number, got {self.scale}")
        if self.family is Family.STABLE and self.kappa != 0.0:
            raise DomainError(f"a stable subordinator has kappa = 0, got {self.kappa}")
        if self.family is Family.TEMPERED_STABLE and not self.kappa > 0.0:
            raise DomainError(f"tempered stable needs kappa > 0, got {self.kappa}")

    @classmethod
    def stable(cls, beta: float, drift: float = 0.0, scale: float = 1.0) -> "SubordinatorSpec":
        return cls(Family.STABLE, beta, 0.0, drift, scale)

    @classmethod
    def tempered_stable(
        cls, beta: float, kappa: float, drift: float = 0.0, scale: float = 1.0
    ) -> "SubordinatorSpec":
        return cls(Family.TEMPERED_STABLE, beta, kappa, drift, scale)

    @property
    def stable_coefficient(self) -> float:
        """``c0`` such that the untempered jump part has exponent ``c0 * s**beta``."""
        if self.family is Family.STABLE:
            return self.scale
        return self.scale * math.gamma(1.0 - self.beta) / self.beta

    def levy_density(self, x):
        """Density of the Levy measure on ``x > 0``."""
        x = np.asarray(x, dtype=float)
        if self.family is Family.STABLE:
            c = self.scale * self.beta / math.gamma(1.0 - self.beta)
            return c * x ** (-1.0 - self.beta)
        return self.scale * np.exp(-self.kappa * x) * x ** (-1.0 - self.beta)


def laplace_exponent(spec: SubordinatorSpec, s: float) -> float:
    """Closed-form Laplace exponent ``psi(s)``.

    Cross-checked against :func:`laplace_exponent_quad` in the test-suite.
    """
    if not s >= 0.0:
        raise DomainError(f"the Laplace exponent is evaluated at s >= 0, got {s}")
    jump = spec.stable_coefficient
    if spec.family is Family.STABLE:
        jump *= s**spec.beta
    else:
        jump *= (s + spec.kappa) ** spec.beta - spec.kappa**spec.beta
    return spec.drift * s + jump


def laplace_exponent_quad(spec: SubordinatorSpec, s: float) -> float:
    """``psi(s)`` by adaptive quadrature of the Levy-Khintchine integral.

    The singular factor ``x**-beta`` near zero is handled with QUADPACK's
    algebraic weight, the remaining integrand ``(1 - e^{-sx})/x * ...`` is smooth.
    """
    if not s >= 0.0:
        raise DomainError(f"the Laplace exponent is evaluated at s >= 0, got {s}")
    if s == 0.0:
        return 0.0
    b = spec.beta
    if spec.family is Family.STABLE:
        c, k = spec.scale * b / math.gamma(1.0 - b), 0.0
    else:
        c, k = spec.scale, spec.kappa

    def near(x):
        # (1 - e^{-sx}) e^{-kx} / x, finite at x = 0
        return -math.expm1(-s * x) / x * math.exp(-k * x) if x > 0 else s

    def far(x):
        return -math.expm1(-s * x) * math.exp(-k * x) * x ** (-1.0 - b)

    head, _ = integrate.quad(near, 0.0, 1.0, weight="alg", wvar=(-b, 0.0),
                             epsabs=0.0, epsrel=1e-12, limit=200)
    tail, _ = integrate.quad(far, 1.0, np.inf, epsabs=0.0, epsrel=1e-12, limit=200)
    return spec.drift * s + c * (head + tail)


def acceptance_rate(spec: SubordinatorSpec, dt: float) -> float:
    """Probability that one stable candidate survives exponential tempering."""
    if spec.family is Family.STABLE:
        return 1.0
    return math.exp(-dt * spec.stable_coefficient * spec.kappa**spec.beta)


def _kanter(beta: float, size: int, rng: Generator) -> np.ndarray:
    # Kanter (1975): with U ~ Unif(0, pi) and W ~ Exp(1),
    #   S = sin(beta U) / sin(U)^(1/beta) * (sin((1-beta) U) / W)^((1-beta)/beta)
    # satisfies E exp(-s S) = exp(-s^beta).
    u = rng.uniform(0.0, np.pi, size)
    w = rng.standard_exponential(size)
    return (np.sin(beta * u) / np.sin(u) ** (1.0 / beta)
            * (np.sin((1.0 - beta) * u) / w) ** ((1.0 - beta) / beta))


def _jump_increments(spec: SubordinatorSpec, dt: float, size: int, rng: Generator) -> np.ndarray:
    scale = (spec.stable_coefficient * dt) ** (1.0 / spec.beta)
    if spec.family is Family.STABLE:
        return scale * _kanter(spec.beta, size, rng)

    # tempering: keep a stable candidate V with probability exp(-kappa V)
    rate = acceptance_rate(spec, dt)
    out = np.empty(size)
    filled = proposed = accepted = 0
    while filled < size:
        want = size - filled
        m = int(want / max(rate, 1e-3) * 1.1) + 16
        v = scale * _kanter(spec.beta, m, rng)
        keep = v[rng.uniform(size=m) < np.exp(-spec.kappa * v)]
        take = min(keep.size, want)
        out[filled:filled + take] = keep[:take]
        filled += take
        proposed += m
        accepted += keep.size
    log.debug("tempered sampler: dt=%g acceptance %.4f (nominal %.4f)",
              dt, accepted / proposed, rate)
    return out


def sample_increments(spec: SubordinatorSpec, dt: float, size: int, rng: Generator) -> np.ndarray:
    """``size`` i.i.d. draws distributed as ``D(dt)``.

    Draws that come out non-positive (possible only through floating-point
    underflow) are redrawn, so every returned value is strictly positive.
    """
    if not dt > 0.0:
        raise DomainError(f"dt must be positive, got {dt}")
    z = spec.drift * dt + _jump_increments(spec, dt, size, rng)
    bad = ~(z > 0.0)
    while bad.any():
        z[bad] = spec.drift * dt + _jump_increments(spec, dt, int(bad.sum()), rng)
        bad = ~(z > 0.0)
    return z


def sample_increment(spec: SubordinatorSpec, dt: float, rng: Generator) -> float:
    """One draw distributed as ``D(dt)``."""
    return float(sample_increments(spec, dt, 1, rng)[0])


@dataclass(frozen=True)
class SubordinatorPath:
    """``D(0), D(delta), ..., D((N+1) delta)`` with ``D(N delta) <= T < D((N+1) delta)``."""

    delta: float
    values: np.ndarray = field(repr=False)
    horizon: float
    stop_index: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if not 0.0 < self.delta < 1.0:
            raise DomainError(f"delta must lie in (0, 1), got {self.delta}")
        if not self.horizon > 0.0:
            raise DomainError(f"horizon must be positive, got {self.horizon}")
        n = self.stop_index
        if v.ndim != 1 or v.size != n + 2:
            raise DomainError(f"expected {n + 2} path values for stop index {n}, got {v.shape}")
        if v[0] != 0.0:
            raise DomainError("a subordinator path starts at 0")
        if not np.all(np.diff(v) > 0.0):
            raise DomainError("subordinator path values must be strictly increasing")
        if not v[n] <= self.horizon < v[n + 1]:
            raise DomainError(
                f"stop index {n} does not bracket the horizon: "
                f"D(N delta)={v[n]}, T={self.horizon}, D((N+1) delta)={v[n + 1]}"
            )

    @property
    def times(self) -> np.ndarray:
        return self.delta * np.arange(self.values.size)


def append_increments(values: np.ndarray, spec, dt, count, rng) -> np.ndarray:
    """Extend ``values`` by ``count`` cumulative steps, enforcing strict increase."""
    z = sample_increments(spec, dt, count, rng)
    while True:
        ext = np.cumsum(np.concatenate(([values[-1]], z)))
        bad = ~(np.diff(ext) > 0.0)
        if not bad.any():
            return np.concatenate((values, ext[1:]))
        # increment lost to rounding against a large running sum
        z[bad] = sample_increments(spec, dt, int(bad.sum()), rng)


def grow_until(spec: SubordinatorSpec, delta: float, horizon: float, rng: Generator,
               max_steps: int = MAX_STEPS) -> np.ndarray:
    """Cumulative path on the ``delta`` grid, cut just after it first exceeds ``horizon``."""
    values = np.zeros(1)
    batch = _FIRST_BATCH
    while values[-1] <= horizon:
        if values.size - 1 >= max_steps:
            raise ResourceError(
                f"subordinator did not pass T={horizon} within {max_steps} steps of {delta}"
            )
        count = min(batch, max_steps - (values.size - 1))
        values = append_increments(values, spec, delta, count, rng)
        batch = min(2 * batch, _MAX_BATCH)
    first = int(np.argmax(values > horizon))
    return values[: first + 1]


def simulate_path_until(spec: SubordinatorSpec, delta: float, horizon: float, rng: Generator,
                        max_steps: int = MAX_STEPS) -> SubordinatorPath:
    """Simulate ``D`` on ``{0, delta, 2 delta, ...}`` until it passes ``horizon``.

    Raises
    ------
    ResourceError
        If more than ``max_steps`` increments would be needed.
    """
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    if not horizon > 0.0:
        raise DomainError(f"horizon must be positive, got {horizon}")
    values = grow_until(spec, delta, horizon, rng, max_steps)
    return SubordinatorPath(delta, values, horizon, values.size - 2)
