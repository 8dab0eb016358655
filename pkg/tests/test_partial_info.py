import numpy as np
import pytest

from levyrate import (CostParams, Deterministic, DiscreteAtoms, Exponential, OffPeriodSpec, compound_poisson,
                      constants_from_primitives, objective_in_X, solve)
from levyrate.cost import ProblemConstants
from levyrate.errors import ModelError
from levyrate.partial_info import PartialInfoModel, direct_cost, reduce, solve_partial

from oracles import compound_sum_law, renewal_cost

EXP1 = compound_poisson(1.0, Exponential(1.0))
OFF1 = OffPeriodSpec(1.0)
COST1 = CostParams(h=1, K=1, d=1, r=2)


def reduced_objective(model, rate_of_n):
    consts, veff = reduce(model)
    n = model.n_dist.v
    R = np.asarray(rate_of_n(n), float)
    g = 1.0 / (R - consts.rho)
    table = dict(zip(veff.v, veff.v * (g - consts.q)))
    return objective_in_X(consts, veff, lambda v: np.vectorize(table.__getitem__)(v))


def test_degenerate_single_customer():
    m = PartialInfoModel.from_probs([1.0], 1.7, 0.0, EXP1, OFF1, COST1)
    consts, veff = reduce(m)
    full = constants_from_primitives(EXP1, Deterministic(1.7), OFF1, COST1)
    assert consts == full
    assert np.array_equal(veff.v, [1.7])
    ps = solve_partial(m)
    fs = solve(EXP1, Deterministic(1.7), OFF1, COST1)
    assert ps.search.G_min == pytest.approx(fs.search.G_min, rel=1e-12)


@pytest.mark.parametrize("rule", [lambda n: np.full_like(n, 2.0), lambda n: 1 + 1 / n])
def test_two_point_count(rule):
    m = PartialInfoModel.from_probs([0.5, 0.5], 1.0, 1.0, EXP1, OFF1, COST1)
    assert reduced_objective(m, rule) == pytest.approx(direct_cost(m, rule), rel=1e-9)


def test_variance_raises_k2():
    a = reduce(PartialInfoModel.from_probs([0.3, 0.7], 1.2, 0.0, EXP1, OFF1, COST1))[0]
    b = reduce(PartialInfoModel.from_probs([0.3, 0.7], 1.2, 0.8, EXP1, OFF1, COST1))[0]
    assert b.K2 > a.K2
    assert b.K2 - a.K2 == pytest.approx(0.8 / (2 * 1.2))


def _random_model(rng):
    k = rng.integers(1, 6)
    p = rng.dirichlet(np.ones(k))
    exp = compound_poisson(rng.uniform(0.3, 2), Exponential(rng.uniform(0.5, 3)))
    off = OffPeriodSpec(rng.uniform(0.2, 3), off_mean_workload_product=rng.uniform(0, 1))
    r = np.inf if rng.random() < 0.2 else exp.rho + rng.uniform(0.2, 3)
    costs = CostParams(h=rng.uniform(0.1, 3), K=rng.uniform(0.1, 50), d=0.0 if np.isinf(r) else rng.uniform(0, 3), r=r)
    return PartialInfoModel.from_probs(p, rng.uniform(0.1, 3), rng.uniform(0, 4), exp, off, costs)


def test_reduction_exact_on_random_pairs(rng):
    for _ in range(100):
        m = _random_model(rng)
        hi = m.costs.r if np.isfinite(m.costs.r) else m.exp.rho + 10
        R = rng.uniform(m.exp.rho + 1e-2, hi, m.n_dist.v.size)
        rule = lambda n, R=R, n0=m.n_dist.v: R[np.searchsorted(n0, n)]
        assert reduced_objective(m, rule) == pytest.approx(direct_cost(m, rule), rel=1e-9)


def test_total_variance_identity_exact():
    # demands on {0.5, 2} with probs (0.6, 0.4); N on {1, 2, 3}
    atoms, probs = (0.5, 2.0), (0.6, 0.4)
    delta = 0.6 * 0.5 + 0.4 * 2.0
    sigma2 = 0.6 * 0.25 + 0.4 * 4.0 - delta**2
    pn = np.array([0.2, 0.5, 0.3])
    g = np.array([1.0, 0.7, 0.3])
    laws = compound_sum_law(3, atoms, probs)
    direct = sum(pn[n - 1] * g[n - 1] * sum(p * v * v for v, p in laws[n].items()) for n in (1, 2, 3))
    n = np.arange(1, 4)
    assert direct == pytest.approx(sigma2 * (pn @ (n * g)) + delta**2 * (pn @ (n * n * g)), rel=1e-13)


def test_direct_cost_vs_full_joint_law():
    atoms, probs = (0.5, 2.0), (0.6, 0.4)
    delta = 1.1
    sigma2 = 0.6 * 0.25 + 0.4 * 4.0 - delta**2
    m = PartialInfoModel.from_probs([0.2, 0.5, 0.3], delta, sigma2, EXP1, OFF1, COST1)
    rule = lambda n: 1.2 + 0.25 * np.asarray(n)
    laws = compound_sum_law(3, atoms, probs)
    V, R, W = [], [], []
    for n, pn in zip((1, 2, 3), (0.2, 0.5, 0.3)):
        for v, p in laws[n].items():
            V.append(v), R.append(rule(n)), W.append(pn * p)
    oracle = renewal_cost(V, R, W, EXP1.rho, EXP1.mu, 1, 1, 1, 1.0)
    assert direct_cost(m, rule) == pytest.approx(oracle, rel=1e-12)


def test_partial_optimum_beats_constant_rates():
    m = PartialInfoModel.from_probs([0.4, 0.6], 1.0, 0.5, EXP1, OFF1, CostParams(h=1, K=30, d=1, r=2))
    sol = solve_partial(m)
    opt = direct_cost(m, lambda n: sol.rate_of_n(n, m.delta))
    assert opt == pytest.approx(sol.search.G_min, rel=1e-9)
    grid = np.linspace(1 + 1e-4, 2, 10_000)
    best_const = min(direct_cost(m, lambda n, R=R: np.full_like(n, R)) for R in grid)
    assert opt <= best_const + 1e-12


def test_rate_nondecreasing_in_count():
    m = PartialInfoModel.from_probs([0.1, 0.2, 0.3, 0.2, 0.2], 0.8, 0.3, EXP1, OFF1, CostParams(h=1, K=60, d=1, r=2))
    sol = solve_partial(m)
    R = sol.rate_of_n(m.n_dist.v, m.delta)
    assert np.all(np.diff(R) >= 0)


def test_information_ordering(rng):
    # V = sum of N exponential demands; both problems evaluated on one joint sample
    delta, pn = 1.0, np.array([0.3, 0.4, 0.3])
    costs = CostParams(h=1, K=40, d=1, r=2)
    m = PartialInfoModel.from_probs(pn, delta, delta**2, EXP1, OFF1, costs)
    part = solve_partial(m)
    n = rng.choice([1, 2, 3], size=20_000, p=pn)
    V = rng.gamma(n, delta)
    full = solve(EXP1, DiscreteAtoms(tuple(V), tuple(np.full(V.size, 1 / V.size))), OFF1, costs)
    part_emp = renewal_cost(V, part.rate_of_n(n, delta), np.ones(V.size), 1.0, 1.0, 40, 1, 1, 1.0)
    assert full.search.G_min <= part_emp + 1e-12
    # the sample version of the partial cost sits within Monte Carlo error of the exact one
    assert part_emp == pytest.approx(part.search.G_min, rel=2e-2)
    assert full.search.G_min < part.search.G_min


def test_bad_models_rejected():
    with pytest.raises(ModelError):
        PartialInfoModel.from_probs([1.0], 0.0, 1.0, EXP1, OFF1, COST1)
    with pytest.raises(ModelError):
        PartialInfoModel(DiscreteAtoms((1.5,), (1.0,)), 1.0, 0.0, EXP1, OFF1, COST1)
