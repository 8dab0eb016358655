"""Steady-state workload during on periods, and the full on/off mixture.

The on-period steady state Y has LST

    E[(1 - exp(-a V)) / (a R - eta(a))] / E[V / (R - rho)]

and the equivalent representation U*V + e_1 + ... + e_N under the law of
(V, R) tilted by V/(R - rho), with (N+1) | (V,R) geometric(1 - rho/R) and
e_i drawn from the input's equilibrium law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .distributions import Distribution
from .errors import DivergentMoment, ModelError
from .levy import LevyExponent
from .policy import AffineRate, RatePolicy, policy_kinks


@dataclass(frozen=True)
class FirstJump:
    """Off period ends at the first jump epoch (no drift: workload 0 until then)."""

    name: str = field(default="first_jump", init=False)


@dataclass(frozen=True)
class FixedTime:
    T: float
    name: str = field(default="fixed_time", init=False)

    def __post_init__(self):
        if not self.T > 0:
            raise ModelError("fixed off-period length must be positive")


@dataclass(frozen=True)
class ExpTimer:
    rate: float
    name: str = field(default="exp_timer", init=False)

    def __post_init__(self):
        if not self.rate > 0:
            raise ModelError("timer rate must be positive")


TauRule = Union[FirstJump, FixedTime, ExpTimer]


@dataclass(frozen=True)
class OffPeriodSpec:
    """Off-period summary: E tau and the injected scalar E tau * E Z (clearing part)."""

    mean_tau: float
    off_mean_workload_product: float = 0.0
    tau_rule: TauRule = field(default_factory=FirstJump)

    def __post_init__(self):
        if not self.mean_tau > 0:
            raise ModelError("mean off-period length must be positive")
        if self.off_mean_workload_product < 0:
            raise ModelError("E tau * E Z must be nonnegative")

    @classmethod
    def first_jump(cls, exp: LevyExponent) -> "OffPeriodSpec":
        if exp.c != 0 or not exp.has_jumps:
            raise ModelError("first-jump off period requires a driftless compound Poisson input")
        return cls(mean_tau=1.0 / exp.poisson_rate, tau_rule=FirstJump())


def _check_moments(vdist: Distribution, policy: RatePolicy) -> None:
    # R = rho + sV gives E[V/(R-rho)^2] = E[1/V]/s^2, infinite if V has density at 0
    if isinstance(policy, AffineRate) and not vdist.atomic and vdist.support[0] == 0:
        raise DivergentMoment("E[1/V] is infinite for this workload law; affine policy has no finite mean")


def tilted_mass(vdist: Distribution, policy: RatePolicy, rho: float) -> float:
    """E[V / (R - rho)] (the mean on-period length)."""
    return vdist.expect(lambda v: v * policy.inv_gap(v, rho), policy_kinks(policy))


def ytilde_lst(exp: LevyExponent, vdist: Distribution, policy: RatePolicy, alpha: float) -> float:
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    if alpha == 0:
        return 1.0
    rho = exp.rho
    gap = alpha * rho - exp.eta(alpha)  # >= 0 by concavity

    def integrand(v):
        g = policy.inv_gap(v, rho)
        # 1/(aR - eta) written through g = 1/(R - rho) so that R = inf gives 0
        return -np.expm1(-alpha * v) * g / (alpha + g * gap)

    kinks = policy_kinks(policy)
    return vdist.expect(integrand, kinks) / vdist.expect(lambda v: v * policy.inv_gap(v, rho), kinks)


def ytilde_mean(exp: LevyExponent, vdist: Distribution, policy: RatePolicy) -> float:
    _check_moments(vdist, policy)
    rho, mu = exp.rho, exp.mu
    kinks = policy_kinks(policy)

    def integrand(v):
        g = policy.inv_gap(v, rho)
        return v * v * g / 2.0 + mu * rho * v * g * g

    return vdist.expect(integrand, kinks) / tilted_mass(vdist, policy, rho)


def affine_ytilde_mean(exp: LevyExponent, vdist: Distribution, slope: float) -> float:
    """EV/2 + (mu rho / s) E[1/V] for R = rho + sV."""
    if not vdist.atomic and vdist.support[0] == 0:
        raise DivergentMoment("E[1/V] is infinite for this workload law")
    inv_mean = vdist.expect(lambda v: 1.0 / v)
    return vdist.mean() / 2.0 + exp.mu * exp.rho / slope * inv_mean


def mixture_weights(vdist, policy, off: OffPeriodSpec, rho: float) -> tuple[float, float]:
    on = tilted_mass(vdist, policy, rho)
    total = off.mean_tau + on
    w_off = off.mean_tau / total
    return w_off, 1.0 - w_off


def wtilde_lst(
    exp: LevyExponent,
    vdist: Distribution,
    policy: RatePolicy,
    off: OffPeriodSpec,
    ztilde_lst: Callable[[float], float],
    alpha: float,
) -> float:
    w_off, w_on = mixture_weights(vdist, policy, off, exp.rho)
    return w_off * ztilde_lst(alpha) + w_on * ytilde_lst(exp, vdist, policy, alpha)


def sample_tilted(
    vdist: Distribution, policy: RatePolicy, rho: float, rng: np.random.Generator, size: int
) -> np.ndarray:
    """Draw V from the law with density proportional to v/(R(v)-rho) dF(v)."""
    if vdist.atomic:
        v = vdist.v
        w = vdist.p * v * policy.inv_gap(v, rho)
        return rng.choice(v, size=size, p=w / w.sum())
    v_max = min(vdist.support[1], vdist.quantile(1 - 1e-9))
    bound = policy.tilt_bound(v_max, rho)
    out = np.empty(size)
    filled = 0
    batch = max(1024, size)
    while filled < size:
        cand = vdist.sample(rng, batch)
        w = cand * policy.inv_gap(cand, rho)
        keep = cand[rng.random(batch) * bound < w]
        take = min(keep.size, size - filled)
        out[filled : filled + take] = keep[:take]
        filled += take
    return out


def sample_ytilde(
    exp: LevyExponent,
    vdist: Distribution,
    policy: RatePolicy,
    rng: np.random.Generator,
    size: int,
) -> np.ndarray:
    """Geometric-sum sampler for the on-period steady state."""
    rho = exp.rho
    v = sample_tilted(vdist, policy, rho, rng, size)
    R = np.asarray(policy.rate(v), dtype=float)
    u = rng.random(size)
    p_stop = np.where(np.isinf(R), 1.0, 1.0 - rho / R)
    n = rng.geometric(p_stop) - 1
    total = int(n.sum())
    e = exp.sample_equilibrium(rng, total)
    sums = np.zeros(size)
    if total:
        owner = np.repeat(np.arange(size), n)
        sums = np.bincount(owner, weights=e, minlength=size)
    return u * v + sums


def fixed_time_workload(exp: LevyExponent, T: float, mass_tol: float = 1e-15):
    """Law of J_T conditional on J_T > 0, for compound Poisson with a deterministic jump and no drift.

    Returns (DiscreteAtoms, P(J_T > 0)).
    """
    from scipy.stats import poisson

    from .distributions import DiscreteAtoms, is_deterministic

    if exp.c != 0 or exp.jumps is None or not is_deterministic(exp.jumps):
        raise ModelError("closed-form J_T needs driftless input with a deterministic jump")
    x = exp.jumps.values[0]
    lam = exp.poisson_rate * T
    kmax = int(poisson.isf(mass_tol, lam)) + 2
    k = np.arange(1, kmax + 1)
    pk = poisson.pmf(k, lam)
    p_pos = -math.expm1(-lam)
    pk = pk / pk.sum()
    return DiscreteAtoms(tuple(x * k), tuple(pk)), p_pos
