import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from levyrate import Deterministic, DiscreteAtoms, Exponential, Uniform, compound_poisson, pure_drift
from levyrate.levy import LevyExponent

from conftest import exp_density, quad_density, unif_density


def fd1(f, h=1e-4):
    # one-sided at 0: eta is only defined on [0, inf)
    return (-3 * f(0.0) + 4 * f(h) - f(2 * h)) / (2 * h)


def fd2(f, h=1e-3):
    return (2 * f(0.0) - 5 * f(h) + 4 * f(2 * h) - f(3 * h)) / h**2


def test_eta_at_zero_is_zero():
    assert compound_poisson(1.0, Exponential(1.0)).eta(0.0) == 0.0


def test_eta_exponential_matches_quadrature():
    exp = compound_poisson(1.0, Exponential(1.0))
    oracle = quad_density(lambda x: 1 - np.exp(-x), exp_density(1.0), 0, np.inf)
    assert exp.eta(1.0) == pytest.approx(0.5, abs=1e-14)
    assert exp.eta(1.0) == pytest.approx(oracle, rel=1e-10)


def test_eta_uniform_matches_quadrature():
    exp = compound_poisson(0.5, Uniform(0.0, 1.0))
    for a in (0.3, 1.0, 7.0):
        oracle = 0.5 * quad_density(lambda x: 1 - np.exp(-a * x), unif_density(0, 1), 0, 1)
        assert exp.eta(a) == pytest.approx(oracle, rel=1e-10)


def test_pure_drift_eta():
    assert pure_drift(2.0).eta(3.0) == 6.0
    assert pure_drift(1.0).rho == 1.0


@pytest.mark.parametrize(
    "exp, rho, mu",
    [
        (compound_poisson(1.0, Exponential(1.0)), 1.0, 1.0),
        (compound_poisson(0.5, Uniform(0.0, 1.0)), 0.25, 1 / 3),
        (compound_poisson(1.0, Deterministic(2.0)), 2.0, 1.0),
    ],
)
def test_rho_mu_against_finite_differences(exp, rho, mu):
    assert exp.rho == pytest.approx(rho, rel=1e-14)
    assert exp.mu == pytest.approx(mu, rel=1e-14)
    assert fd1(exp.eta) == pytest.approx(rho, rel=1e-4)
    assert -fd2(exp.eta) / (2 * exp.rho) == pytest.approx(mu, rel=1e-3)


def test_rho_as_limit_of_eta_over_alpha():
    exp = compound_poisson(1.3, Uniform(0.2, 1.7), drift=0.4)
    al = np.array([1e-6, 1e-5, 1e-4])
    ratio = exp.eta(al) / al
    # linear extrapolation to alpha = 0
    slope, icpt = np.polyfit(al, ratio, 1)
    assert icpt == pytest.approx(exp.rho, rel=1e-6)


@settings(max_examples=40, deadline=None)
@given(
    c=st.floats(0, 3),
    nu=st.floats(0.1, 5),
    theta=st.floats(0.2, 5),
    grid=st.lists(st.floats(0, 20), min_size=3, max_size=3, unique=True),
)
def test_eta_nondecreasing_and_concave(c, nu, theta, grid):
    exp = compound_poisson(nu, Exponential(theta), drift=c)
    a1, a2, a3 = sorted(grid)
    e1, e2, e3 = exp.eta(a1), exp.eta(a2), exp.eta(a3)
    assert e1 <= e2 + 1e-12 <= e3 + 2e-12
    if a3 > a1:
        interp = e1 + (e3 - e1) * (a2 - a1) / (a3 - a1)
        assert e2 >= interp - 1e-10


def test_equilibrium_exponential_mean(rng):
    exp = compound_poisson(1.0, Exponential(1.0))
    x = exp.sample_equilibrium(rng, 200_000)
    se = x.std() / np.sqrt(x.size)
    assert abs(x.mean() - exp.mu) < 3 * se


def test_equilibrium_deterministic_is_uniform(rng):
    exp = compound_poisson(1.0, Deterministic(2.0))
    x = exp.sample_equilibrium(rng, 50_000)
    assert stats.kstest(x, stats.uniform(0, 2).cdf).pvalue > 1e-3


def test_equilibrium_drift_atom(rng):
    exp = compound_poisson(1.0, Exponential(1.0), drift=1.0)
    x = exp.sample_equilibrium(rng, 200_000)
    frac = np.mean(x == 0)
    assert abs(frac - 0.5) < 3 * np.sqrt(0.25 / x.size)


def test_equilibrium_uniform_density(rng):
    exp = compound_poisson(1.0, Uniform(0.0, 2.0))
    x = exp.sample_equilibrium(rng, 50_000)
    cdf = lambda t: np.clip((4 * t - t * t) / 4, 0, 1)  # density 2(b - x)/b^2, b = 2
    assert stats.kstest(x, cdf).pvalue > 1e-3


@pytest.mark.parametrize(
    "exp",
    [
        compound_poisson(1.0, Exponential(1.0)),
        compound_poisson(2.0, DiscreteAtoms((0.5, 3.0), (0.7, 0.3)), drift=0.5),
        compound_poisson(0.5, Uniform(0.0, 1.0)),
    ],
)
def test_equilibrium_lst_matches_samples(exp, rng):
    x = exp.sample_equilibrium(rng, 100_000)
    for a in (0.5, 1.0, 2.0):
        e = np.exp(-a * x)
        se = e.std() / np.sqrt(x.size)
        assert abs(e.mean() - exp.equilibrium_lst(a)) < 3 * se


def test_invalid_exponent_rejected():
    with pytest.raises(ValueError):
        LevyExponent(c=0.0)
    with pytest.raises(ValueError):
        DiscreteAtoms((1.0, 2.0), (0.5, 0.4))
    with pytest.raises(ValueError):
        Exponential(-1.0)
