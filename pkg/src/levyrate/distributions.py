"""Nonnegative distributions used for jump sizes and for the initial workload V.

Every family exposes closed-form moments, its Laplace transform, vectorized
sampling, and ``expect(f)`` which integrates a vectorized function against the
law (finite sums for atoms, adaptive Gauss-Kronrod quadrature otherwise).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import ModelError

QUAD_TOL = 1e-11


class Distribution:
    """Common interface; subclasses are frozen dataclasses."""

    kind: str = ""
    atomic: bool = False

    def mean(self) -> float:
        return self.moment(1)

    def second_moment(self) -> float:
        return self.moment(2)

    def moment(self, k: int) -> float:
        raise NotImplementedError

    def laplace(self, alpha):
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError

    def sample_size_biased(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw from the law with density proportional to x * F(dx)."""
        raise NotImplementedError

    @property
    def support(self) -> tuple[float, float]:
        raise NotImplementedError

    def ess_inf(self) -> float:
        return self.support[0]

    def quantile(self, q: float) -> float:
        raise NotImplementedError

    def expect(self, f: Callable, kinks: Sequence[float] = ()) -> float:
        raise NotImplementedError

    def partial_moment(self, k: int, upper) -> np.ndarray:
        """E[X^k 1{X <= upper}], vectorized in ``upper``."""
        raise NotImplementedError


def _quad(f, lo, hi, weight, kinks):
    cuts = sorted({float(x) for x in kinks if lo < x < hi})
    edges = [lo, *cuts, hi]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(
            lambda v: float(f(np.float64(v))) * weight(v),
            a,
            b,
            epsabs=QUAD_TOL,
            epsrel=QUAD_TOL,
            limit=400,
        )
        total += val
    return total


@dataclass(frozen=True)
class Exponential(Distribution):
    rate: float
    kind: str = field(default="exponential", init=False, repr=False)

    def __post_init__(self):
        if not self.rate > 0:
            raise ModelError(f"exponential rate must be positive, got {self.rate}")

    def moment(self, k):
        return math.factorial(k) / self.rate**k

    def laplace(self, alpha):
        return self.rate / (self.rate + np.asarray(alpha, dtype=float))

    def sample(self, rng, size):
        return rng.exponential(1.0 / self.rate, size)

    def sample_size_biased(self, rng, size):
        return rng.gamma(2.0, 1.0 / self.rate, size)

    @property
    def support(self):
        return (0.0, math.inf)

    def quantile(self, q):
        return -math.log1p(-q) / self.rate

    def expect(self, f, kinks=()):
        th = self.rate
        cuts = sorted(float(x) for x in kinks if x > 0)
        total = 0.0
        lo = 0.0
        for c in cuts:
            total += _quad(f, lo, c, lambda v: th * math.exp(-th * v), ())
            lo = c
        val, _ = integrate.quad(
            lambda v: float(f(np.float64(v))) * th * math.exp(-th * v),
            lo,
            math.inf,
            epsabs=QUAD_TOL,
            epsrel=QUAD_TOL,
            limit=400,
        )
        return total + val

    def partial_moment(self, k, upper):
        from scipy.special import gammainc

        u = np.maximum(np.asarray(upper, dtype=float), 0.0)
        # x^k e^{-x} integrates to an Erlang(k+1) CDF
        return math.factorial(k) / self.rate**k * gammainc(k + 1, self.rate * u)


@dataclass(frozen=True)
class Uniform(Distribution):
    a: float
    b: float
    kind: str = field(default="uniform", init=False, repr=False)

    def __post_init__(self):
        if not (0 <= self.a < self.b):
            raise ModelError(f"uniform needs 0 <= a < b, got ({self.a}, {self.b})")

    def moment(self, k):
        a, b = self.a, self.b
        return (b ** (k + 1) - a ** (k + 1)) / ((k + 1) * (b - a))

    def laplace(self, alpha):
        al = np.asarray(alpha, dtype=float)
        a, b = self.a, self.b
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.exp(-al * a) * -np.expm1(-al * (b - a)) / (al * (b - a))
        return np.where(al == 0, 1.0, out)

    def sample(self, rng, size):
        return rng.uniform(self.a, self.b, size)

    def sample_size_biased(self, rng, size):
        u = rng.random(size)
        return np.sqrt(self.a**2 + u * (self.b**2 - self.a**2))

    @property
    def support(self):
        return (self.a, self.b)

    def quantile(self, q):
        return self.a + q * (self.b - self.a)

    def expect(self, f, kinks=()):
        w = 1.0 / (self.b - self.a)
        return _quad(f, self.a, self.b, lambda v: w, kinks)

    def partial_moment(self, k, upper):
        u = np.clip(np.asarray(upper, dtype=float), self.a, self.b)
        return (u ** (k + 1) - self.a ** (k + 1)) / ((k + 1) * (self.b - self.a))


@dataclass(frozen=True)
class DiscreteAtoms(Distribution):
    """Finitely many strictly positive atoms.  Stored sorted by value."""

    values: tuple
    probs: tuple
    kind: str = field(default="discrete", init=False, repr=False)
    atomic: bool = field(default=True, init=False, repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        p = np.asarray(self.probs, dtype=float).ravel()
        if v.shape != p.shape or v.size == 0:
            raise ModelError("atoms and probabilities must be non-empty and of equal length")
        if np.any(v <= 0) or not np.all(np.isfinite(v)):
            raise ModelError("atoms must be strictly positive and finite")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ModelError(f"probabilities must be nonnegative and sum to 1 (sum={p.sum()!r})")
        order = np.argsort(v, kind="stable")
        object.__setattr__(self, "values", tuple(v[order].tolist()))
        object.__setattr__(self, "probs", tuple(p[order].tolist()))

    @property
    def v(self) -> np.ndarray:
        return np.asarray(self.values)

    @property
    def p(self) -> np.ndarray:
        return np.asarray(self.probs)

    def moment(self, k):
        return float(np.dot(self.p, self.v**k))

    def laplace(self, alpha):
        al = np.asarray(alpha, dtype=float)
        return np.exp(-np.multiply.outer(al, self.v)) @ self.p

    def sample(self, rng, size):
        return rng.choice(self.v, size=size, p=self.p)

    def sample_size_biased(self, rng, size):
        w = self.p * self.v
        return rng.choice(self.v, size=size, p=w / w.sum())

    @property
    def support(self):
        return (self.values[0], self.values[-1])

    def ess_inf(self):
        v, p = self.v, self.p
        return float(v[p > 0][0])

    def quantile(self, q):
        idx = int(np.searchsorted(np.cumsum(self.p), q))
        return self.values[min(idx, len(self.values) - 1)]

    def expect(self, f, kinks=()):
        return float(np.dot(self.p, np.asarray(f(self.v), dtype=float)))

    def partial_moment(self, k, upper):
        u = np.asarray(upper, dtype=float)
        cum = np.concatenate([[0.0], np.cumsum(self.p * self.v**k)])
        idx = np.searchsorted(self.v, u, side="right")
        return cum[idx]


def Deterministic(x: float) -> DiscreteAtoms:
    return DiscreteAtoms((x,), (1.0,))


def Empirical(sample: Sequence[float]) -> DiscreteAtoms:
    """Equal-weight atoms at the observed values (ties merged)."""
    s = np.asarray(sample, dtype=float).ravel()
    if s.size == 0:
        raise ModelError("empirical sample is empty")
    vals, counts = np.unique(s, return_counts=True)
    p = counts / counts.sum()
    p[-1] = 1.0 - p[:-1].sum()
    return DiscreteAtoms(tuple(vals), tuple(p))


def is_deterministic(dist: Distribution) -> bool:
    return isinstance(dist, DiscreteAtoms) and len(dist.values) == 1
