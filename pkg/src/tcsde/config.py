"""YAML experiment configs.

One file can drive every CLI command; each command reads the shared
``subordinator``/``sde``/``horizon``/``seed`` keys and its own section::

    seed: 20240501
    horizon: 1.0
    subordinator:
      family: tempered_stable      # or: stable
      beta: 0.95
      kappa: 1.0
      drift: 0.0
      scale: normalized            # number, or "normalized" = beta / Gamma(1 - beta)
    sde:
      preset: gbm                  # gbm | linear-drift-gbm | ou | zero
      params: {}
      y0: [1.0]
    simulate_path:
      delta: 0.001
    convergence:
      delta_exponents: [4, 5, 6, 7, 8, 9]   # or deltas: [0.0625, ...]
      n_paths: 300
      workers: 1
    moments:
      delta: 0.001
      n_paths: 10000
      orders: [1, 2]
      times: [0.0, 0.5, 1.0]
      exp_lambda: 0.5

Unknown keys are rejected. Errors carry the dotted key path and, when the
key exists in the file, its line number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import yaml

from .errors import ConfigError, DomainError
from .harness import DEFAULT_DELTAS
from .sde import PRESET_PARAMS
from .subordinator import Family, SubordinatorSpec, normalized_scale

_TOP_KEYS = {"seed", "horizon", "subordinator", "sde", "simulate_path", "convergence", "moments"}
_SECTION_KEYS = {
    "subordinator": {"family", "beta", "kappa", "drift", "scale"},
    "sde": {"preset", "params", "y0"},
    "simulate_path": {"delta"},
    "convergence": {"deltas", "delta_exponents", "n_paths", "workers"},
    "moments": {"delta", "n_paths", "orders", "times", "exp_lambda"},
}


@dataclass
class SimulatePathSettings:
    delta: float = 1e-3


@dataclass
class ConvergenceSettings:
    deltas: tuple = DEFAULT_DELTAS
    n_paths: int = 300
    workers: int = 1


@dataclass
class MomentsSettings:
    delta: float = 1e-3
    n_paths: int = 10_000
    orders: tuple = (1, 2)
    times: tuple = (0.0, 0.5, 1.0)
    exp_lambda: Optional[float] = 0.5


@dataclass
class ExperimentConfig:
    spec: SubordinatorSpec
    preset: str = "gbm"
    preset_params: dict = field(default_factory=dict)
    y0: tuple = (1.0,)
    horizon: float = 1.0
    seed: int = 0
    simulate_path: SimulatePathSettings = field(default_factory=SimulatePathSettings)
    convergence: ConvergenceSettings = field(default_factory=ConvergenceSettings)
    moments: MomentsSettings = field(default_factory=MomentsSettings)


def _line_map(text: str) -> dict[str, int]:
    """Dotted key path -> 1-based line of the key in ``text``."""
    lines: dict[str, int] = {}

    def walk(node, prefix):
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                path = f"{prefix}.{k.value}" if prefix else str(k.value)
                lines[path] = k.start_mark.line + 1
                walk(v, path)

    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return lines
    walk(root, "")
    return lines


def _yaml11_float(value):
    # YAML 1.1 reads "1e-3" or "1.0e6" (no exponent sign) as strings
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            return value
    return value


class _Reader:
    def __init__(self, data: dict, lines: dict[str, int]):
        self.data = data
        self.lines = lines

    def fail(self, path: str, msg: str):
        raise ConfigError(path, msg, self.lines.get(path))

    def section(self, name: str) -> dict:
        sec = self.data.get(name, {})
        if sec is None:
            return {}
        if not isinstance(sec, dict):
            self.fail(name, "expected a mapping")
        for key in sec:
            if key not in _SECTION_KEYS[name]:
                self.fail(f"{name}.{key}", f"unknown key; allowed: {sorted(_SECTION_KEYS[name])}")
        return sec

    def number(self, sec, path, default, *, lo=None, hi=None, lo_open=False, hi_open=False):
        key = path.rsplit(".", 1)[-1]
        value = sec.get(key, default) if isinstance(sec, dict) else default
        value = _yaml11_float(value)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(path, f"expected a number, got {value!r}")
        value = float(value)
        if not math.isfinite(value):
            self.fail(path, "must be finite")
        if lo is not None and (value < lo or (lo_open and value == lo)):
            self.fail(path, f"must be {'>' if lo_open else '>='} {lo}, got {value}")
        if hi is not None and (value > hi or (hi_open and value == hi)):
            self.fail(path, f"must be {'<' if hi_open else '<='} {hi}, got {value}")
        return value

    def integer(self, sec, path, default, *, lo=None):
        key = path.rsplit(".", 1)[-1]
        value = sec.get(key, default)
        if isinstance(value, bool) or not isinstance(value, int):
            self.fail(path, f"expected an integer, got {value!r}")
        if lo is not None and value < lo:
            self.fail(path, f"must be >= {lo}, got {value}")
        return value

    def number_list(self, sec, path, default):
        key = path.rsplit(".", 1)[-1]
        value = sec.get(key, default)
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            value = [value]
        if not isinstance(value, (list, tuple)) or not value:
            self.fail(path, f"expected a non-empty list of numbers, got {value!r}")
        out = []
        for v in map(_yaml11_float, value):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                self.fail(path, f"expected numbers, got {v!r}")
            out.append(v)
        return tuple(out)


def parse_config(data: Any, lines: Optional[dict] = None) -> ExperimentConfig:
    lines = lines or {}
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("<root>", "expected a mapping at the top level")
    r = _Reader(data, lines)
    for key in data:
        if key not in _TOP_KEYS:
            r.fail(str(key), f"unknown key; allowed: {sorted(_TOP_KEYS)}")

    sub = r.section("subordinator")
    if "beta" not in sub:
        r.fail("subordinator.beta", "required")
    family = sub.get("family", "stable")
    try:
        family = Family(family)
    except ValueError:
        r.fail("subordinator.family", f"must be one of {[f.value for f in Family]}, got {family!r}")
    beta = r.number(sub, "subordinator.beta", None, lo=0.0, hi=1.0, lo_open=True, hi_open=True)
    default_kappa = 0.0 if family is Family.STABLE else None
    if family is Family.TEMPERED_STABLE and "kappa" not in sub:
        r.fail("subordinator.kappa", "required for tempered_stable")
    kappa = r.number(sub, "subordinator.kappa", default_kappa, lo=0.0)
    drift = r.number(sub, "subordinator.drift", 0.0, lo=0.0)
    scale = sub.get("scale", 1.0)
    if scale == "normalized":
        scale = 1.0 if family is Family.STABLE else normalized_scale(beta)
    else:
        scale = r.number(sub, "subordinator.scale", 1.0, lo=0.0, lo_open=True)
    try:
        spec = SubordinatorSpec(family, beta, kappa, drift, scale)
    except DomainError as exc:
        r.fail("subordinator", str(exc))

    sde = r.section("sde")
    name = sde.get("preset", "gbm")
    if name not in PRESET_PARAMS:
        r.fail("sde.preset", f"must be one of {sorted(PRESET_PARAMS)}, got {name!r}")
    params = sde.get("params") or {}
    if not isinstance(params, dict):
        r.fail("sde.params", "expected a mapping")
    for key, value in params.items():
        if key not in PRESET_PARAMS[name]:
            r.fail(f"sde.params.{key}", f"preset {name!r} accepts {sorted(PRESET_PARAMS[name])}")
        if name == "zero":
            r.integer(params, f"sde.params.{key}", None, lo=1)
        else:
            r.number(params, f"sde.params.{key}", None)
    dim = int(params.get("dim", 1)) if name == "zero" else 1
    y0 = r.number_list(sde, "sde.y0", [1.0] * dim)
    if len(y0) != dim:
        r.fail("sde.y0", f"preset {name!r} has state dimension {dim}, got {len(y0)} values")

    horizon = r.number(data, "horizon", 1.0, lo=0.0, lo_open=True)
    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        r.fail("seed", f"expected an unsigned 64-bit integer, got {seed!r}")

    sp = r.section("simulate_path")
    sim = SimulatePathSettings(
        delta=r.number(sp, "simulate_path.delta", 1e-3, lo=0.0, hi=1.0, lo_open=True, hi_open=True))

    cv = r.section("convergence")
    if "deltas" in cv and "delta_exponents" in cv:
        r.fail("convergence.deltas", "give either deltas or delta_exponents, not both")
    if "delta_exponents" in cv:
        exps = r.number_list(cv, "convergence.delta_exponents", None)
        if any(int(e) != e or e < 1 for e in exps):
            r.fail("convergence.delta_exponents", "exponents must be positive integers")
        deltas = tuple(2.0 ** -int(e) for e in exps)
    else:
        deltas = tuple(float(d) for d in r.number_list(cv, "convergence.deltas", list(DEFAULT_DELTAS)))
    if any(not 0.0 < d < 1.0 for d in deltas):
        r.fail("convergence.deltas", "every delta must lie in (0, 1)")
    if any(a <= b for a, b in zip(deltas, deltas[1:])):
        r.fail("convergence.deltas", "deltas must be strictly decreasing")
    conv = ConvergenceSettings(
        deltas=deltas,
        n_paths=r.integer(cv, "convergence.n_paths", 300, lo=2),
        workers=r.integer(cv, "convergence.workers", 1, lo=1),
    )

    mo = r.section("moments")
    orders = r.number_list(mo, "moments.orders", [1, 2])
    if any(int(o) != o or o < 1 for o in orders):
        r.fail("moments.orders", "orders must be positive integers")
    times = r.number_list(mo, "moments.times", [0.0, 0.5, 1.0])
    if any(t < 0 for t in times):
        r.fail("moments.times", "times must be >= 0")
    lam = mo.get("exp_lambda", 0.5)
    if lam is not None:
        lam = r.number(mo, "moments.exp_lambda", 0.5)
    mom = MomentsSettings(
        delta=r.number(mo, "moments.delta", 1e-3, lo=0.0, hi=1.0, lo_open=True, hi_open=True),
        n_paths=r.integer(mo, "moments.n_paths", 10_000, lo=2),
        orders=tuple(int(o) for o in orders),
        times=tuple(sorted(float(t) for t in times)),
        exp_lambda=lam,
    )

    return ExperimentConfig(spec, name, dict(params), tuple(float(v) for v in y0),
                            horizon, seed, sim, conv, mom)


def load_config(path) -> ExperimentConfig:
    """Read and validate a YAML config. Raises :class:`ConfigError` or ``OSError``."""
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError("<file>", f"not valid YAML: {exc}",
                          None if mark is None else mark.line + 1) from None
    return parse_config(data, _line_map(text))
