from .core import SimConfig, SimReport, estimate_ytilde_mean, run, simulate_cycles
from .kernel import BACKEND
from .stats import Estimate

__all__ = ["SimConfig", "SimReport", "Estimate", "run", "simulate_cycles", "estimate_ytilde_mean", "BACKEND"]
