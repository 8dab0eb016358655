"""Subordinator input: drift plus compound Poisson jumps."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .distributions import DiscreteAtoms, Distribution, Exponential, Uniform
from .errors import ModelError


@dataclass(frozen=True)
class LevyExponent:
    """Nondecreasing Levy input with drift ``c`` and jumps at rate ``poisson_rate``.

    ``jumps`` may be None only for a pure drift (c > 0).
    """

    c: float = 0.0
    poisson_rate: float = 0.0
    jumps: Optional[Distribution] = None

    def __post_init__(self):
        if self.c < 0:
            raise ModelError(f"drift must be nonnegative, got {self.c}")
        if self.jumps is None:
            if self.poisson_rate not in (0, 0.0):
                raise ModelError("poisson_rate given without a jump distribution")
            if not self.c > 0:
                raise ModelError("a subordinator without jumps needs positive drift")
        else:
            if not self.poisson_rate > 0:
                raise ModelError("poisson_rate must be positive when jumps are present")
            if self.jumps.support[0] < 0:
                raise ModelError("jump sizes must be nonnegative")

    @property
    def has_jumps(self) -> bool:
        return self.jumps is not None

    def eta(self, alpha):
        """Levy exponent: c*alpha + rate * E[1 - exp(-alpha * jump)]."""
        al = np.asarray(alpha, dtype=float)
        out = self.c * al
        if self.jumps is not None:
            out = out + self.poisson_rate * (1.0 - self.jumps.laplace(al))
        return out if out.ndim else float(out)

    @property
    def rho(self) -> float:
        """Mean input rate E J_1."""
        jump_part = self.poisson_rate * self.jumps.mean() if self.jumps is not None else 0.0
        return self.c + jump_part

    @property
    def mu(self) -> float:
        """Mean of the equilibrium law with transform eta(a)/(rho*a)."""
        if self.jumps is None:
            return 0.0
        return self.poisson_rate * self.jumps.second_moment() / (2.0 * self.rho)

    @property
    def jump_work_rate(self) -> float:
        return self.rho - self.c

    def equilibrium_lst(self, alpha):
        al = np.asarray(alpha, dtype=float)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.asarray(self.eta(al)) / (self.rho * al)
        return np.where(al == 0, 1.0, out)

    def sample_equilibrium(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draws from the law with LST eta(a)/(rho*a).

        Drift contributes an atom at 0 with weight c/rho; the jump part is the
        stationary-excess law of the jump size (size-biased draw times U(0,1)).
        """
        out = np.zeros(size)
        if self.jumps is None:
            return out
        w_jump = self.jump_work_rate / self.rho
        take = rng.random(size) < w_jump if self.c > 0 else np.ones(size, dtype=bool)
        m = int(take.sum())
        out[take] = self.jumps.sample_size_biased(rng, m) * rng.random(m)
        return out


def compound_poisson(rate: float, jumps: Distribution, drift: float = 0.0) -> LevyExponent:
    return LevyExponent(c=drift, poisson_rate=rate, jumps=jumps)


def pure_drift(c: float) -> LevyExponent:
    return LevyExponent(c=c)


__all__ = [
    "LevyExponent",
    "compound_poisson",
    "pure_drift",
    "Exponential",
    "Uniform",
    "DiscreteAtoms",
]
