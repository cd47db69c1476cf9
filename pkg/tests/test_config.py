import math

import pytest

from tcsde import ConfigError, normalized_scale
from tcsde.config import load_config, parse_config
from tcsde.subordinator import Family

BASE = """\
seed: 3
horizon: 1.0
subordinator:
  family: tempered_stable
  beta: 0.95
  kappa: 1.0
  scale: normalized
sde:
  preset: gbm
convergence:
  delta_exponents: [4, 5]
  n_paths: 4
"""


def _write(tmp_path, text):
    p = tmp_path / "c.yaml"
    p.write_text(text)
    return p


def test_base_config(tmp_path):
    cfg = load_config(_write(tmp_path, BASE))
    assert cfg.seed == 3
    assert cfg.spec.family is Family.TEMPERED_STABLE
    assert cfg.spec.scale == normalized_scale(0.95)
    assert cfg.convergence.deltas == (2**-4, 2**-5)
    assert cfg.y0 == (1.0,)
    assert cfg.moments.orders == (1, 2)


def test_minimal_stable():
    cfg = parse_config({"subordinator": {"beta": 0.5}})
    assert cfg.spec.family is Family.STABLE and cfg.spec.scale == 1.0


@pytest.mark.parametrize("text, field, line", [
    (BASE.replace("beta: 0.95", "beta: 1.5"), "subordinator.beta", 5),
    (BASE.replace("kappa: 1.0", "kappa: -1"), "subordinator.kappa", 6),
    (BASE + "extra: 1\n", "extra", 13),
    (BASE.replace("preset: gbm", "preset: heston"), "sde.preset", 9),
    (BASE.replace("n_paths: 4", "n_paths: 1"), "convergence.n_paths", 12),
    (BASE.replace("seed: 3", "seed: -3"), "seed", 1),
    (BASE.replace("  preset: gbm", "  preset: gbm\n  wiggle: 2"), "sde.wiggle", 10),
])
def test_errors_name_field_and_line(tmp_path, text, field, line):
    with pytest.raises(ConfigError) as info:
        load_config(_write(tmp_path, text))
    assert info.value.field == field
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_missing_required():
    with pytest.raises(ConfigError, match="subordinator.beta"):
        parse_config({})
    with pytest.raises(ConfigError, match="subordinator.kappa"):
        parse_config({"subordinator": {"family": "tempered_stable", "beta": 0.5}})


def test_y0_dimension_checked():
    with pytest.raises(ConfigError, match="sde.y0"):
        parse_config({"subordinator": {"beta": 0.5},
                      "sde": {"preset": "zero", "params": {"dim": 2}, "y0": [1.0]}})
    cfg = parse_config({"subordinator": {"beta": 0.5},
                        "sde": {"preset": "zero", "params": {"dim": 2}, "y0": [1.0, 2.0]}})
    assert cfg.y0 == (1.0, 2.0)


def test_deltas_must_decrease():
    with pytest.raises(ConfigError, match="decreasing"):
        parse_config({"subordinator": {"beta": 0.5}, "convergence": {"deltas": [0.1, 0.2]}})


def test_bad_yaml(tmp_path):
    with pytest.raises(ConfigError, match="YAML"):
        load_config(_write(tmp_path, "a: [1, 2\n"))


def test_moment_settings():
    cfg = parse_config({"subordinator": {"beta": 0.9},
                        "moments": {"times": [1.0, 0.0], "exp_lambda": None}})
    assert cfg.moments.times == (0.0, 1.0)
    assert cfg.moments.exp_lambda is None
    assert not math.isnan(cfg.moments.delta)


def test_unsigned_exponent_numbers(tmp_path):
    text = BASE.replace("kappa: 1.0", "kappa: 1e0") + "simulate_path: {delta: 1e-3}\n"
    cfg = load_config(_write(tmp_path, text))
    assert cfg.spec.kappa == 1.0 and cfg.simulate_path.delta == 1e-3
    with pytest.raises(ConfigError, match="expected a number"):
        parse_config({"subordinator": {"beta": "half"}})
