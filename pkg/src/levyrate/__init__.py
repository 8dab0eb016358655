"""Optimal workload-dependent output rates for Levy storage processes with vacations."""

from .cost import CostParams, ProblemConstants, constants_from_primitives, objective_in_X, steady_cost
from .distributions import Deterministic, DiscreteAtoms, Empirical, Exponential, Uniform
from .levy import LevyExponent, compound_poisson, pure_drift
from .policy import AffineRate, ConstantRate, FunctionRate, WaterFillRate
from .ratesearch import GCurve, minimize_G, minimize_G_discrete, solve
from .steady_state import (
    ExpTimer,
    FirstJump,
    FixedTime,
    OffPeriodSpec,
    sample_ytilde,
    wtilde_lst,
    ytilde_lst,
    ytilde_mean,
)

__version__ = "0.1.0"
