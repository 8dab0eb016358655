import numpy as np
import pytest
from scipy import integrate

from levyrate import CostParams, Exponential, OffPeriodSpec, compound_poisson


def quad_density(f, density, lo, hi, points=None):
    """Independent quadrature oracle: integral of f * density over [lo, hi]."""
    val, _ = integrate.quad(lambda x: f(x) * density(x), lo, hi, points=points, limit=400,
                            epsabs=1e-13, epsrel=1e-12)
    return val


def exp_density(theta):
    return lambda x: theta * np.exp(-theta * x)


def unif_density(a, b):
    return lambda x: 1.0 / (b - a)


@pytest.fixture
def mm1():
    """Unit-rate exponential input, first-jump off period, K = h = d = 1, r = 2."""
    exp = compound_poisson(1.0, Exponential(1.0))
    return exp, Exponential(1.0), OffPeriodSpec.first_jump(exp), CostParams(h=1, K=1, d=1, r=2)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


_ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """criterion(n, ok, text): record one PASS/FAIL line for the summary, then assert."""

    def record(n, ok, text):
        line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {text}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
