"""Phase I: best allocation X >= 0 for a fixed budget E X = alpha.

The allocation is x(v, lam) = v (lam - v/2)^+ / (2 mu rho), optionally capped
at r0 * v when a minimal output rate exists.  All expectations reduce to
partial moments E[V^k 1{V <= u}], which every workload family provides in
closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .distributions import Distribution
from .errors import InfeasibleBudget

LAMBDA_TOL = 1e-10
BUDGET_TOL = 1e-12
MAX_BISECT = 200


@dataclass(frozen=True)
class Phase1Solution:
    alpha: float
    lambda_alpha: float
    f_value: float
    rate_cap_active: bool


def x_of(v, lam, mu_rho):
    v = np.asarray(v, dtype=float)
    return v * np.maximum(lam - v / 2.0, 0.0) / (2.0 * mu_rho)


def x_capped(v, lam, mu_rho, cap=None):
    x = x_of(v, lam, mu_rho)
    return x if cap is None else np.minimum(x, cap * np.asarray(v, dtype=float))


def _band(vdist, lo, hi, k):
    return vdist.partial_moment(k, hi) - vdist.partial_moment(k, lo)


def _cap_edge(lam, mu_rho, cap):
    # x(v, lam) >= cap*v  <=>  v <= 2 (lam - 2 mu rho cap)
    return np.maximum(2.0 * (np.asarray(lam, dtype=float) - 2.0 * mu_rho * cap), 0.0)


def xi(vdist: Distribution, lam, mu_rho: float, cap: Optional[float] = None):
    """E x(V, lam), or E[x ^ cap*V] with a cap.  Vectorized in ``lam``."""
    lam = np.maximum(np.asarray(lam, dtype=float), 0.0)
    top = 2.0 * lam
    lo = np.zeros_like(lam) if cap is None else _cap_edge(lam, mu_rho, cap)
    out = (lam * _band(vdist, lo, top, 1) - 0.5 * _band(vdist, lo, top, 2)) / (2.0 * mu_rho)
    if cap is not None:
        out = out + cap * vdist.partial_moment(1, lo)
    return out if out.ndim else float(out)


def phase1_value(vdist: Distribution, lam, mu_rho: float, cap: Optional[float] = None):
    """E[V X/2 + mu rho X^2 / V] at X = x(V, lam) (capped if requested)."""
    lam = np.maximum(np.asarray(lam, dtype=float), 0.0)
    top = 2.0 * lam
    lo = np.zeros_like(lam) if cap is None else _cap_edge(lam, mu_rho, cap)
    out = (lam**2 * _band(vdist, lo, top, 1) - 0.25 * _band(vdist, lo, top, 3)) / (4.0 * mu_rho)
    if cap is not None:
        out = out + cap / 2.0 * vdist.partial_moment(2, lo) + mu_rho * cap**2 * vdist.partial_moment(1, lo)
    return out if out.ndim else float(out)


def solve_lambda_alpha(vdist: Distribution, alpha: float, mu_rho: float, cap: Optional[float] = None) -> float:
    """Smallest lam with xi(lam) = alpha (bracket doubling, then bisection)."""
    if alpha <= 0:
        return 0.0
    if cap is not None:
        ceiling = cap * vdist.mean()
        if alpha > ceiling * (1 + 1e-12):
            raise InfeasibleBudget(f"budget {alpha} exceeds r0*EV = {ceiling}")
        if alpha >= ceiling:
            return math.inf
    lo = 0.0
    hi = max(vdist.ess_inf() / 2.0, 1e-6)
    while xi(vdist, hi, mu_rho, cap) < alpha:
        lo, hi = hi, 2.0 * hi
    for _ in range(MAX_BISECT):
        if hi - lo <= LAMBDA_TOL:
            break
        mid = 0.5 * (lo + hi)
        val = xi(vdist, mid, mu_rho, cap)
        if abs(val - alpha) <= BUDGET_TOL:
            return mid
        if val < alpha:
            lo = mid
        else:
            hi = mid
    return hi


def solve_phase1(vdist: Distribution, alpha: float, mu_rho: float, cap: Optional[float] = None) -> Phase1Solution:
    lam = solve_lambda_alpha(vdist, alpha, mu_rho, cap)
    if math.isinf(lam):
        ev1, ev2 = vdist.mean(), vdist.second_moment()
        f = cap / 2.0 * ev2 + mu_rho * cap**2 * ev1
        return Phase1Solution(alpha, lam, f, True)
    f = phase1_value(vdist, lam, mu_rho, cap) if alpha > 0 else 0.0
    return Phase1Solution(alpha, lam, f, cap is not None)


def f_of_alpha(vdist: Distribution, alpha: float, mu_rho: float, cap: Optional[float] = None) -> float:
    return solve_phase1(vdist, alpha, mu_rho, cap).f_value


def optimal_rate(v, lam, mu_rho, rho, r):
    """rho + [1/(r-rho) + (lam - v/2)^+/(2 mu rho)]^{-1}; r may be inf."""
    q = 0.0 if math.isinf(r) else 1.0 / (r - rho)
    g = q + np.maximum(lam - np.asarray(v, dtype=float) / 2.0, 0.0) / (2.0 * mu_rho)
    with np.errstate(divide="ignore"):
        return np.where(g == 0, math.inf, rho + 1.0 / np.where(g == 0, 1.0, g))
