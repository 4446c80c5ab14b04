import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qnr_enclose.model import build_diag_example, build_pipe

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("default")

# Filled by tests/test_acceptance.py, printed after the run.
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture(scope="session")
def pipe8():
    return build_pipe(25.0, 1.0, 14.0, 8)


@pytest.fixture(scope="session")
def diag6():
    return build_diag_example(6)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_hermitian(rng, n, scale=1.0):
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * (X + X.conj().T) / 2


def random_pd(rng, n, shift=0.5):
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    M = X @ X.conj().T + shift * np.eye(n)
    return (M + M.conj().T) / 2


def cubic_oracle(t, k, delta):
    """Largest root of (y² + t²)(y - kt) - (2/δ)ty by bisection above kt."""

    def f(y):
        return (y * y + t * t) * (y - k * t) - (2.0 / delta) * t * y

    lo, hi = k * t, k * t + 1.0 / delta + math.sqrt(2 * t / delta) + 1.0
    while f(hi) < 0:
        hi *= 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
