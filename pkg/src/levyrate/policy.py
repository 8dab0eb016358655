"""Output-rate policies v -> R(v), chosen at the start of each on period."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import UnstablePolicy


class RatePolicy:
    kind = ""

    def rate(self, v):
        raise NotImplementedError

    def inv_gap(self, v, rho: float):
        """1/(R(v) - rho), zero where the rate is infinite."""
        r = np.asarray(self.rate(v), dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(np.isinf(r), 0.0, 1.0 / (r - rho))

    def tilt_bound(self, v_max: float, rho: float) -> float:
        """Upper bound of v/(R(v)-rho) on (0, v_max]."""
        raise NotImplementedError

    def check(self, vdist, rho: float, r: float = math.inf) -> None:
        """Raise UnstablePolicy unless rho < R(v) <= r on a grid over the support."""
        lo, hi = vdist.support
        if vdist.atomic:
            grid = np.asarray(vdist.values)
        else:
            hi = min(hi, vdist.quantile(1 - 1e-9))
            grid = np.linspace(max(lo, 1e-12), hi, 257)
        R = np.asarray(self.rate(grid), dtype=float)
        if np.any(R <= rho):
            raise UnstablePolicy(f"{self!r} gives R <= rho={rho} on the support of V")
        if np.any(R > r * (1 + 1e-12)):
            raise UnstablePolicy(f"{self!r} exceeds the maximal rate r={r}")


@dataclass(frozen=True)
class ConstantRate(RatePolicy):
    R: float
    kind = "constant"

    def rate(self, v):
        return np.full_like(np.asarray(v, dtype=float), self.R)

    def tilt_bound(self, v_max, rho):
        return v_max / (self.R - rho)


@dataclass(frozen=True)
class AffineRate(RatePolicy):
    """R = rho + slope * v."""

    rho: float
    slope: float
    kind = "affine"

    def rate(self, v):
        return self.rho + self.slope * np.asarray(v, dtype=float)

    def inv_gap(self, v, rho):
        if rho == self.rho:
            return 1.0 / (self.slope * np.asarray(v, dtype=float))
        return super().inv_gap(v, rho)

    def tilt_bound(self, v_max, rho):
        return 1.0 / self.slope


@dataclass(frozen=True)
class WaterFillRate(RatePolicy):
    """Optimal rule R = rho + [1/(r-rho) + (lam - v/2)^+ / (2 mu rho)]^{-1}.

    ``r`` may be infinite (then 1/(r-rho) = 0 and R = inf when lam <= v/2);
    ``r_min`` clamps from below, which is the capped allocation x ^ r0*v.
    """

    lam: float
    mu_rho: float
    rho: float
    r: float
    r_min: Optional[float] = None
    kind = "waterfill"

    @property
    def q(self) -> float:
        return 0.0 if math.isinf(self.r) else 1.0 / (self.r - self.rho)

    def inv_gap(self, v, rho=None):
        v = np.asarray(v, dtype=float)
        g = self.q + np.maximum(self.lam - v / 2.0, 0.0) / (2.0 * self.mu_rho)
        if self.r_min is not None:
            g = np.minimum(g, 1.0 / (self.r_min - self.rho))
        if rho is not None and rho != self.rho:
            return RatePolicy.inv_gap(self, v, rho)
        return g

    def rate(self, v):
        g = self.inv_gap(v)
        with np.errstate(divide="ignore"):
            return np.where(g == 0, math.inf, self.rho + 1.0 / np.where(g == 0, 1.0, g))

    def tilt_bound(self, v_max, rho):
        bound = v_max * self.q + self.lam**2 / (4.0 * self.mu_rho)
        if self.r_min is not None:
            bound = min(bound, v_max / (self.r_min - self.rho))
        return bound


@dataclass(frozen=True)
class FunctionRate(RatePolicy):
    """Arbitrary vectorized rule; used for random policies and table lookups."""

    fn: object
    kind = "function"

    def rate(self, v):
        return np.asarray(self.fn(np.asarray(v, dtype=float)), dtype=float)

    def tilt_bound(self, v_max, rho):
        grid = np.linspace(v_max * 1e-9, v_max, 4097)
        return float(np.max(grid * self.inv_gap(grid, rho))) * 1.05


def policy_kinks(policy: RatePolicy) -> list:
    """Points of v where R(v) is not smooth (for quadrature splitting)."""
    if isinstance(policy, WaterFillRate):
        pts = [2.0 * policy.lam]
        if policy.r_min is not None:
            r0 = 1.0 / (policy.r_min - policy.rho) - policy.q
            pts.append(2.0 * (policy.lam - 2.0 * policy.mu_rho * r0))
        return [p for p in pts if p > 0]
    return []
