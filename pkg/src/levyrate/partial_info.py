"""Rate control when only the customer count N is observed.

With V = sum of N i.i.d. service demands (mean delta, variance sigma2) and
(N, R) independent of the demands, the cost equals the full-information cost
for V_eff = delta * N with the coefficient of E[V/(R-rho)] raised by
h sigma2 / (2 delta).  The reduced instance is solved exactly by the discrete
segment minimizer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .cost import CostParams, ProblemConstants, constants_from_primitives
from .distributions import DiscreteAtoms
from .errors import ModelError
from .levy import LevyExponent
from .policy import WaterFillRate
from .ratesearch import SearchResult, minimize_G_discrete, policy_from_lambda
from .steady_state import OffPeriodSpec


@dataclass(frozen=True)
class PartialInfoModel:
    n_dist: DiscreteAtoms
    delta: float
    sigma2: float
    exp: LevyExponent
    off: OffPeriodSpec
    costs: CostParams

    def __post_init__(self):
        if not self.delta > 0:
            raise ModelError("mean service demand delta must be positive")
        if self.sigma2 < 0:
            raise ModelError("variance sigma2 must be nonnegative")
        n = self.n_dist.v
        if np.any(n != np.round(n)) or np.any(n < 1):
            raise ModelError("N must be supported on {1, 2, ...}")

    @classmethod
    def from_probs(cls, p, delta, sigma2, exp, off, costs):
        """``p[i]`` is P(N = i + 1); zero entries are dropped."""
        p = np.asarray(p, dtype=float)
        n = np.arange(1, p.size + 1)
        keep = p > 0
        return cls(DiscreteAtoms(tuple(n[keep].astype(float)), tuple(p[keep])), delta, sigma2, exp, off, costs)


def reduce(model: PartialInfoModel) -> tuple[ProblemConstants, DiscreteAtoms]:
    m = model
    veff = DiscreteAtoms(tuple(m.delta * m.n_dist.v), m.n_dist.probs)
    base = constants_from_primitives(m.exp, veff, m.off, m.costs)
    extra = m.costs.h * m.sigma2 / (2.0 * m.delta)
    q = m.costs.q(m.exp.rho)
    # E[V g] = E X + q E V, so the extra term splits into K2 and K1 parts
    consts = ProblemConstants(
        K1=base.K1 + extra * q * veff.mean(),
        K2=base.K2 + extra,
        K3=base.K3,
        mu=base.mu,
        rho=base.rho,
        r=base.r,
        h=base.h,
    )
    return consts, veff


def direct_cost(model: PartialInfoModel, rate_of_n: Callable) -> float:
    """Cost of a rule n -> R(n) from the total-variance form (no change of variable)."""
    m = model
    rho, mu = m.exp.rho, m.exp.mu
    h, d = m.costs.h, m.costs.d
    n, p = m.n_dist.v, m.n_dist.p
    R = np.asarray(rate_of_n(n), dtype=float)
    g = np.where(np.isinf(R), 0.0, 1.0 / (R - rho))
    EN_g = p @ (n * g)
    numer = (
        h * m.off.off_mean_workload_product
        + m.costs.K
        + d * m.delta * (p @ n)
        + (d * rho * m.delta + h * m.sigma2 / 2.0) * EN_g
        + h * (m.delta**2 / 2.0 * (p @ (n * n * g)) + mu * rho * m.delta * (p @ (n * g * g)))
    )
    return float(numer / (m.off.mean_tau + m.delta * EN_g))


@dataclass(frozen=True)
class PartialSolution:
    constants: ProblemConstants
    search: SearchResult
    policy_v: WaterFillRate  # rule in terms of v = delta * n

    def rate_of_n(self, n, delta):
        return self.policy_v.rate(delta * np.asarray(n, dtype=float))


def solve_partial(model: PartialInfoModel) -> PartialSolution:
    consts, veff = reduce(model)
    res = minimize_G_discrete(consts, veff)
    return PartialSolution(consts, res, policy_from_lambda(consts, res.lambda_min))
