"""Long-run average cost of a rate policy and the reduced-problem constants."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .distributions import Distribution
from .errors import InfeasibleModel, ModelError
from .levy import LevyExponent
from .policy import RatePolicy, policy_kinks
from .steady_state import OffPeriodSpec, _check_moments


@dataclass(frozen=True)
class CostParams:
    h: float
    K: float
    d: float
    r: float
    r_min: Optional[float] = None

    def __post_init__(self):
        if not self.h > 0:
            raise ModelError("holding cost h must be positive")
        if not self.K > 0:
            raise ModelError("setup cost K must be positive")
        if self.d < 0:
            raise ModelError("capacity cost d must be nonnegative")
        if math.isinf(self.r) and self.d != 0:
            raise ModelError("an unbounded maximal rate requires d = 0")

    def validate(self, rho: float) -> None:
        if not self.r > rho:
            raise InfeasibleModel(f"maximal rate r={self.r} must exceed rho={rho}")
        if self.r_min is not None and not (rho < self.r_min <= self.r):
            raise InfeasibleModel(f"need rho < r_min <= r, got r_min={self.r_min}")

    def q(self, rho: float) -> float:
        """1/(r - rho), zero for r = inf."""
        return 0.0 if math.isinf(self.r) else 1.0 / (self.r - rho)

    def cap(self, rho: float) -> Optional[float]:
        """Allocation cap r0 with X <= r0 V, or None without a minimal rate."""
        if self.r_min is None:
            return None
        return 1.0 / (self.r_min - rho) - self.q(rho)


@dataclass(frozen=True)
class ProblemConstants:
    K1: float
    K2: float
    K3: float
    mu: float
    rho: float
    r: float
    h: float

    @property
    def mu_rho(self) -> float:
        return self.mu * self.rho

    @property
    def q(self) -> float:
        return 0.0 if math.isinf(self.r) else 1.0 / (self.r - self.rho)


def constants_from_primitives(
    exp: LevyExponent, vdist: Distribution, off: OffPeriodSpec, costs: CostParams
) -> ProblemConstants:
    return constants_from_moments(exp.rho, exp.mu, vdist, off, costs)


def constants_from_moments(
    rho: float, mu: float, vdist: Distribution, off: OffPeriodSpec, costs: CostParams
) -> ProblemConstants:
    costs.validate(rho)
    q = costs.q(rho)
    h, d = costs.h, costs.d
    ev, ev2 = vdist.mean(), vdist.second_moment()
    K1 = (
        h * off.off_mean_workload_product
        + costs.K
        + (d + d * rho * q + h * mu * rho * q * q) * ev
        + h * q / 2.0 * ev2
    )
    K2 = d * rho + 2.0 * h * mu * rho * q
    K3 = off.mean_tau + ev * q
    return ProblemConstants(K1=K1, K2=K2, K3=K3, mu=mu, rho=rho, r=costs.r, h=h)


def steady_cost(
    exp: LevyExponent,
    vdist: Distribution,
    policy: RatePolicy,
    off: OffPeriodSpec,
    costs: CostParams,
) -> float:
    """Renewal-reward cost per unit time of ``policy``."""
    _check_moments(vdist, policy)
    rho, mu = exp.rho, exp.mu
    h, d = costs.h, costs.d
    kinks = policy_kinks(policy)

    def numer(v):
        g = policy.inv_gap(v, rho)
        return d * rho * v * g + h * (v * v * g / 2.0 + mu * rho * v * g * g)

    on_mass = vdist.expect(lambda v: v * policy.inv_gap(v, rho), kinks)
    num = h * off.off_mean_workload_product + costs.K + d * vdist.mean() + vdist.expect(numer, kinks)
    return num / (off.mean_tau + on_mass)


def x_from_policy(policy: RatePolicy, constants: ProblemConstants) -> Callable:
    """Change of variable X = V (1/(R - rho) - 1/(r - rho))."""
    return lambda v: np.asarray(v, dtype=float) * (policy.inv_gap(v, constants.rho) - constants.q)


def objective_in_X(
    constants: ProblemConstants, vdist: Distribution, x_policy: Callable, kinks=()
) -> float:
    c = constants
    ex = vdist.expect(x_policy, kinks)
    quad = vdist.expect(
        lambda v: np.asarray(v) * x_policy(v) / 2.0 + c.mu_rho * x_policy(v) ** 2 / np.asarray(v), kinks
    )
    return (c.K1 + c.K2 * ex + c.h * quad) / (c.K3 + ex)
