import warnings

import pytest

from tcsde import SubordinatorSpec, normalized_scale

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def study_spec():
    # tempered stable, beta=0.95, kappa=1, exponent (s+1)^0.95 - 1
    return SubordinatorSpec.tempered_stable(0.95, 1.0, scale=normalized_scale(0.95))


@pytest.fixture(autouse=True)
def _quiet_fit_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("default")
        yield


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
