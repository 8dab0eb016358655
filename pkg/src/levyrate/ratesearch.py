"""Phase II: minimize G(lam) over the water-filling multiplier.

G(lam) = (K1 + K2 xi(lam) + h f(xi(lam))) / (K3 + xi(lam)) is unimodal with a
minimizer in [0, lam*], lam* = (K1 - K2 K3)^+ / (K3 h).  Continuous workloads
are searched by golden section; discrete workloads are minimized exactly,
segment by segment, since G is a ratio of a quadratic and a linear function
between consecutive seams v_j / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import gammainc

from . import waterfill
from .cost import CostParams, ProblemConstants, constants_from_primitives
from .distributions import DiscreteAtoms, Distribution, Exponential, Uniform
from .levy import LevyExponent
from .policy import WaterFillRate
from .steady_state import OffPeriodSpec

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

BACKENDS = ("exponential", "uniform", "discrete", "quadrature")


# -- A, B, a~ per backend ----------------------------------------------------


def _erlang_cdf(x, n, theta):
    return gammainc(n, theta * np.maximum(x, 0.0))


def abt_exponential(theta: float, lam):
    lam = np.asarray(lam, dtype=float)
    psi2 = _erlang_cdf(2 * lam, 2, theta)
    A = lam / theta * psi2 - _erlang_cdf(2 * lam, 3, theta) / theta**2
    B = lam**2 / theta * psi2 - 1.5 / theta**3 * _erlang_cdf(2 * lam, 4, theta)
    at = psi2 / theta
    return A, B, at


def abt_uniform(a: float, b: float, lam):
    lam = np.asarray(lam, dtype=float)
    u = np.clip(2 * lam, a, b)
    w = 1.0 / (b - a)
    A = w * (lam * (u**2 - a**2) / 2 - (u**3 - a**3) / 6)
    B = w * (lam**2 * (u**2 - a**2) / 2 - (u**4 - a**4) / 16)
    at = w * (u**2 - a**2) / 2
    return A, B, at


def abt_discrete(atoms: DiscreteAtoms, lam):
    lam = np.asarray(lam, dtype=float)
    v, p = atoms.v, atoms.p
    c1 = np.concatenate([[0.0], np.cumsum(p * v)])
    c2 = np.concatenate([[0.0], np.cumsum(p * v**2)])
    c3 = np.concatenate([[0.0], np.cumsum(p * v**3)])
    k = np.searchsorted(v, 2 * lam, side="right")
    A = lam * c1[k] - c2[k] / 2
    B = lam**2 * c1[k] - c3[k] / 4
    return A, B, c1[k]


def abt_quadrature(vdist: Distribution, lam):
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))
    out = np.empty((3, lam_arr.size))
    for i, l in enumerate(lam_arr):
        kinks = [2 * l] if l > 0 else []
        out[0, i] = vdist.expect(lambda v: v * np.maximum(l - v / 2, 0.0), kinks)
        out[1, i] = vdist.expect(lambda v: v * np.maximum(l**2 - v**2 / 4, 0.0), kinks)
        out[2, i] = vdist.expect(lambda v: v * (v <= 2 * l), kinks)
    if np.ndim(lam) == 0:
        return out[0, 0], out[1, 0], out[2, 0]
    return out[0], out[1], out[2]


def default_backend(vdist: Distribution) -> str:
    if isinstance(vdist, Exponential):
        return "exponential"
    if isinstance(vdist, Uniform):
        return "uniform"
    if isinstance(vdist, DiscreteAtoms):
        return "discrete"
    return "quadrature"


@dataclass(frozen=True)
class GCurve:
    constants: ProblemConstants
    vdist: Distribution
    backend: Optional[str] = None
    cap: Optional[float] = None

    def __post_init__(self):
        if self.backend is None:
            object.__setattr__(self, "backend", default_backend(self.vdist))
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}")

    def abt(self, lam):
        """(A(lam), B(lam), a~(lam))."""
        vd = self.vdist
        if self.backend == "exponential":
            return abt_exponential(vd.rate, lam)
        if self.backend == "uniform":
            return abt_uniform(vd.a, vd.b, lam)
        if self.backend == "discrete":
            return abt_discrete(vd, lam)
        return abt_quadrature(vd, lam)


def A_of(vdist, lam, backend=None):
    return GCurve(_UNIT, vdist, backend).abt(lam)[0]


def B_of(vdist, lam, backend=None):
    return GCurve(_UNIT, vdist, backend).abt(lam)[1]


def a_tilde(vdist, lam, backend=None):
    return GCurve(_UNIT, vdist, backend).abt(lam)[2]


_UNIT = ProblemConstants(K1=1.0, K2=1.0, K3=1.0, mu=1.0, rho=1.0, r=2.0, h=1.0)


# -- G and its density --------------------------------------------------------


def G_of(curve: GCurve, lam):
    """G via A and B (or via the capped xi, f when a rate floor is present)."""
    c = curve.constants
    if curve.cap is not None:
        return G_via_phase1(curve, lam)
    A, B, _ = curve.abt(lam)
    m = 2.0 * c.mu_rho
    return (c.K1 + c.K2 / m * A + c.h / (2.0 * m) * B) / (c.K3 + A / m)


def G_via_phase1(curve: GCurve, lam):
    """G through xi(lam) and the Phase-I optimal value f(xi(lam))."""
    c = curve.constants
    x = waterfill.xi(curve.vdist, lam, c.mu_rho, curve.cap)
    f = waterfill.phase1_value(curve.vdist, lam, c.mu_rho, curve.cap)
    return (c.K1 + c.K2 * x + c.h * f) / (c.K3 + x)


def g_numerator(curve: GCurve, lam):
    """K3 K2 - K1 + lam K3 h + h (lam xi - f); nondecreasing in lam."""
    c = curve.constants
    x = waterfill.xi(curve.vdist, lam, c.mu_rho, curve.cap)
    f = waterfill.phase1_value(curve.vdist, lam, c.mu_rho, curve.cap)
    return c.K3 * c.K2 - c.K1 + lam * c.K3 * c.h + c.h * (lam * x - f)


def g_density(curve: GCurve, lam):
    """Right derivative of G.  Without a cap this is

    (a~/2mr) [K3 K2 - K1 + lam K3 h + (h/4mr)(2 lam A - B)] / (K3 + A/2mr)^2.
    """
    c = curve.constants
    lam = np.asarray(lam, dtype=float)
    m = 2.0 * c.mu_rho
    if curve.cap is None:
        A, B, at = curve.abt(lam)
        inner = c.K3 * c.K2 - c.K1 + lam * c.K3 * c.h + c.h / (2.0 * m) * (2 * lam * A - B)
        return at / m * inner / (c.K3 + A / m) ** 2
    vd = curve.vdist
    top = 2.0 * lam
    lo = waterfill._cap_edge(lam, c.mu_rho, curve.cap)
    dxi = (vd.partial_moment(1, top) - vd.partial_moment(1, lo)) / m
    x = waterfill.xi(vd, lam, c.mu_rho, curve.cap)
    return dxi * g_numerator(curve, lam) / (c.K3 + x) ** 2


def lambda_star(constants: ProblemConstants) -> float:
    c = constants
    return max(c.K1 - c.K2 * c.K3, 0.0) / (c.K3 * c.h)


def lipschitz_bound(curve: GCurve, lam_star: float) -> float:
    c = curve.constants
    if lam_star <= 0:
        return 0.0
    A, B, at = curve.abt(lam_star)
    m = 2.0 * c.mu_rho
    return float(
        at / (c.K3**2 * m)
        * (c.K3 * c.K2 + c.K1 + lam_star * c.K3 * c.h + c.h / (2 * m) * (2 * lam_star * A + B))
    )


@dataclass(frozen=True)
class SearchResult:
    lambda_min: float
    G_min: float
    bracket: tuple
    error_bound: float
    evaluations: int
    segments: list = field(default_factory=list, repr=False, compare=False)


def golden_section(fn, a: float, b: float, tol: float):
    """Shrink [a, b] around the minimum of a unimodal ``fn`` to width <= tol.

    Returns (lo, hi, evaluations).
    """
    h = b - a
    c = a + (1 - INV_PHI) * h
    d = a + INV_PHI * h
    fc, fd = fn(c), fn(d)
    n = 2
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = a + (1 - INV_PHI) * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = fn(d)
        n += 1
    return a, b, n


def minimize_G(curve: GCurve, rel_tol: float = 1e-8) -> SearchResult:
    c = curve.constants
    ls = lambda_star(c)
    if ls == 0.0:
        return SearchResult(0.0, c.K1 / c.K3, (0.0, 0.0), 0.0, 0)
    a, b, n = golden_section(lambda l: float(G_of(curve, l)), 0.0, ls, rel_tol * max(1.0, ls))
    lam = 0.5 * (a + b)
    g_min = float(G_of(curve, lam))
    M = lipschitz_bound(curve, ls)
    return SearchResult(lam, g_min, (0.0, ls), M * (b - a), n + 1)


# -- exact minimization for discrete V ---------------------------------------


def discrete_segments(constants: ProblemConstants, atoms: DiscreteAtoms, upto: float) -> list:
    """Rational pieces (S lam^2 + T lam + U)/(Q + W lam) of G on [0, upto].

    Seams sit at v_j/2; within [lo, hi) the active atoms are those with v_j <= 2 lo.
    """
    c = constants
    mr = c.mu_rho
    v, p = atoms.v, atoms.p
    seams = np.unique(v / 2.0)
    edges = [0.0] + [float(s) for s in seams if 0 < s < upto] + [upto]
    segs = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo and not (lo == hi == upto == 0.0):
            continue
        act = v <= 2.0 * lo * (1 + 1e-15)
        s1 = float(np.sum(p[act] * v[act]))
        s2 = float(np.sum(p[act] * v[act] ** 2))
        s3 = float(np.sum(p[act] * v[act] ** 3))
        segs.append(
            dict(
                lam_lo=lo,
                lam_hi=hi,
                S=c.h / (4 * mr) * s1,
                T=c.K2 / (2 * mr) * s1,
                U=c.K1 - c.K2 / (4 * mr) * s2 - c.h / (16 * mr) * s3,
                Q=c.K3 - s2 / (4 * mr),
                W=s1 / (2 * mr),
            )
        )
    return segs


def _segment_value(seg, lam):
    return (seg["S"] * lam**2 + seg["T"] * lam + seg["U"]) / (seg["Q"] + seg["W"] * lam)


def _segment_argmin(seg):
    lo, hi = seg["lam_lo"], seg["lam_hi"]
    cands = [lo, hi]
    S, T, U, Q, W = (seg[k] for k in "STUQW")
    # stationary points of the rational piece
    qa, qb, qc = S * W, 2 * S * Q, T * Q - U * W
    if qa != 0:
        disc = qb * qb - 4 * qa * qc
        if disc >= 0:
            sq = math.sqrt(disc)
            cands += [(-qb + sq) / (2 * qa), (-qb - sq) / (2 * qa)]
    elif qb != 0:
        cands.append(-qc / qb)
    cands = [x for x in cands if lo <= x <= hi]
    vals = [_segment_value(seg, x) for x in cands]
    i = int(np.argmin(vals))
    return cands[i], vals[i]


def minimize_G_discrete(constants: ProblemConstants, atoms: DiscreteAtoms) -> SearchResult:
    c = constants
    ls = lambda_star(c)
    if ls == 0.0:
        return SearchResult(0.0, c.K1 / c.K3, (0.0, 0.0), 0.0, 0, [])
    segs = discrete_segments(c, atoms, ls)
    best = (math.inf, 0.0)
    for seg in segs:
        lam, val = _segment_argmin(seg)
        if val < best[0]:
            best = (val, lam)
    return SearchResult(best[1], best[0], (0.0, ls), 0.0, len(segs), segs)


# -- end to end ---------------------------------------------------------------


@dataclass(frozen=True)
class Solution:
    constants: ProblemConstants
    search: SearchResult
    policy: WaterFillRate
    alpha: float


def policy_from_lambda(constants: ProblemConstants, lam: float, r_min: Optional[float] = None) -> WaterFillRate:
    return WaterFillRate(lam=lam, mu_rho=constants.mu_rho, rho=constants.rho, r=constants.r, r_min=r_min)


def solve_curve(
    curve: GCurve, r_min: Optional[float] = None, exact_discrete: bool = True, rel_tol: float = 1e-8
) -> Solution:
    c = curve.constants
    if exact_discrete and curve.cap is None and isinstance(curve.vdist, DiscreteAtoms):
        res = minimize_G_discrete(c, curve.vdist)
    else:
        res = minimize_G(curve, rel_tol)
    alpha = waterfill.xi(curve.vdist, res.lambda_min, c.mu_rho, curve.cap)
    return Solution(c, res, policy_from_lambda(c, res.lambda_min, r_min), float(alpha))


def solve(
    exp: LevyExponent,
    vdist: Distribution,
    off: OffPeriodSpec,
    costs: CostParams,
    constants: Optional[ProblemConstants] = None,
    backend: Optional[str] = None,
) -> Solution:
    """Phase II then Phase I: the optimal water-filling rate policy."""
    if constants is None:
        constants = constants_from_primitives(exp, vdist, off, costs)
    cap = None
    if costs.r_min is not None:
        cap = 1.0 / (costs.r_min - constants.rho) - constants.q
    curve = GCurve(constants, vdist, backend, cap)
    return solve_curve(curve, costs.r_min)
