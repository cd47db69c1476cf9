"""Euler-Maruyama simulation of SDEs driven by a time-changed Brownian motion.

The time change is the inverse of a subordinator with infinite Levy measure
(stable or exponentially tempered stable). Paths are built as the composition
of an Euler scheme for the parent Ito SDE with a discretized inverse
subordinator, and :mod:`tcsde.harness` measures strong and weak errors of the
scheme by Monte Carlo.
"""

from .errors import (
    ConfigError,
    DomainError,
    NumericError,
    ResourceError,
    UnsupportedError,
)
from .harness import (
    ConvergenceReport,
    ConvergenceRow,
    StudyConfig,
    fit_loglog,
    run_convergence_study,
    strong_error,
    weak_error,
)
from .rng import make_stream, substream
from .sde import (
    CoefficientField,
    EulerPath,
    euler_maruyama,
    gbm_exact,
    preset,
)
from .solver import (
    TimeChangedPath,
    simulate_coupled_pair,
    simulate_time_changed,
)
from .subordinator import (
    Family,
    SubordinatorPath,
    SubordinatorSpec,
    laplace_exponent,
    laplace_exponent_quad,
    normalized_scale,
    sample_increment,
    sample_increments,
    simulate_path_until,
)
from .timechange import (
    TimeChangePath,
    build_time_change,
    evaluate,
    mittag_leffler,
    stable_inverse_moment,
)

__version__ = "0.1.0"
