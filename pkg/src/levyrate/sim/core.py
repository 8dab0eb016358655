"""Event-driven simulation of the on/off storage process, one regenerative cycle at a time.

Cycles are grouped in fixed-size blocks; block b draws from its own stream
seeded by ``SeedSequence(seed, spawn_key=(b,))``, so results do not depend on
how many worker threads process the blocks.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..cost import CostParams
from ..distributions import DiscreteAtoms, Exponential, Uniform
from ..errors import ModelError, UnstablePolicy
from ..levy import LevyExponent
from ..policy import AffineRate, ConstantRate, RatePolicy, WaterFillRate
from ..steady_state import ExpTimer, FirstJump, FixedTime, OffPeriodSpec
from . import _pykernel as cols
from .kernel import get_kernel
from .stats import Estimate, batch_mean, batch_ratio

BLOCK_SIZE = 4096
DEFAULT_ALPHAS = (0.5, 1.0, 2.0)


@dataclass(frozen=True)
class SimConfig:
    exp: LevyExponent
    off: OffPeriodSpec
    policy: RatePolicy
    costs: CostParams
    n_cycles: int = 100_000
    seed: int = 0
    batch_count: int = 32
    alphas: Sequence[float] = DEFAULT_ALPHAS

    def __post_init__(self):
        if self.n_cycles < 10 * self.batch_count:
            raise ModelError("need at least 10 cycles per batch")
        if any(not a > 0 for a in self.alphas):
            raise ModelError("LST grid points must be positive")
        rule = self.off.tau_rule
        if isinstance(rule, FirstJump) and not self.exp.has_jumps:
            raise ModelError("first-jump off period needs a jump component")
        if not isinstance(self.policy, (ConstantRate, AffineRate, WaterFillRate)):
            raise ModelError(f"policy {type(self.policy).__name__} cannot be simulated")
        check_sim_policy(self.policy, self.exp)


def check_sim_policy(policy: RatePolicy, exp: LevyExponent) -> None:
    """R(v) > max(rho, c) for every v > 0."""
    floor = max(exp.rho, exp.c)
    if isinstance(policy, ConstantRate) and not policy.R > floor:
        raise UnstablePolicy(f"constant rate {policy.R} must exceed max(rho, c) = {floor}")
    if isinstance(policy, AffineRate) and (policy.slope <= 0 or policy.rho < floor):
        raise UnstablePolicy("affine policy needs slope > 0 and intercept >= max(rho, c)")
    if isinstance(policy, WaterFillRate) and policy.rho < floor:
        raise UnstablePolicy("water-filling policy built for a different rho")


@dataclass(frozen=True)
class SimReport:
    avg_cost: Estimate
    mean_workload: Estimate
    on_fraction: Estimate
    ytilde_mean: Estimate
    lst_grid: list
    ytilde_lst_grid: list
    mean_cycle_length: Estimate
    mean_V: Estimate
    mean_T_on: Estimate
    off_workload_integral: Estimate  # per-cycle E int_0^tau J dt, i.e. E tau * E Z
    n_cycles: int
    backend: str
    cycles: np.ndarray = field(repr=False, compare=False)


def _kernel_args(cfg: SimConfig):
    exp = cfg.exp
    nu = exp.poisson_rate if exp.has_jumps else 0.0
    jvals = np.zeros(1)
    jcum = np.ones(1)
    jpar = np.zeros(2)
    jd = exp.jumps
    if jd is None:
        jkind = 0
    elif isinstance(jd, Exponential):
        jkind, jpar[0] = 1, jd.rate
    elif isinstance(jd, Uniform):
        jkind, jpar[:] = 2, (jd.a, jd.b)
    elif isinstance(jd, DiscreteAtoms):
        jkind = 3
        jvals = np.ascontiguousarray(jd.v)
        jcum = np.cumsum(jd.p)
        jcum[-1] = 1.0
    else:
        raise ModelError(f"cannot simulate jumps of type {type(jd).__name__}")

    rule = cfg.off.tau_rule
    if isinstance(rule, FirstJump):
        tkind, tpar = 0, 0.0
    elif isinstance(rule, FixedTime):
        tkind, tpar = 1, rule.T
    elif isinstance(rule, ExpTimer):
        tkind, tpar = 2, rule.rate
    else:
        raise ModelError(f"unknown off-period rule {rule!r}")

    pol = cfg.policy
    ppar = np.zeros(5)
    if isinstance(pol, ConstantRate):
        pkind, ppar[0] = 0, pol.R
    elif isinstance(pol, AffineRate):
        pkind, ppar[:2] = 1, (pol.rho, pol.slope)
    else:
        pkind = 2
        gmax = math.inf if pol.r_min is None else 1.0 / (pol.r_min - pol.rho)
        ppar[:] = (pol.lam, pol.mu_rho, pol.rho, pol.q, gmax)
    c = cfg.costs
    return dict(
        drift=float(exp.c),
        nu=float(nu),
        jump_kind=jkind,
        jpar=jpar,
        jvals=jvals,
        jcum=np.ascontiguousarray(jcum),
        tau_kind=tkind,
        tau_par=float(tpar),
        pol_kind=pkind,
        ppar=ppar,
        K=float(c.K),
        h=float(c.h),
        d=float(c.d),
        alphas=np.asarray(cfg.alphas, dtype=float),
    )


def block_state(seed: int, block: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(block,)).generate_state(1, np.uint64)[0])


def default_threads() -> int:
    env = os.environ.get("LEVYRATE_THREADS")
    if env:
        return max(1, int(env))
    return max(1, min(8, os.cpu_count() or 1))


def simulate_cycles(cfg: SimConfig, threads: Optional[int] = None, kernel: Optional[str] = None):
    """Per-cycle statistics array (n_cycles x (8 + 2*len(alphas))) and the kernel name."""
    name, fn = get_kernel(kernel)
    args = _kernel_args(cfg)
    if name == "python":
        args["jvals"] = args["jvals"].tolist()
        args["jcum"] = args["jcum"].tolist()
        args["jpar"] = args["jpar"].tolist()
        args["ppar"] = args["ppar"].tolist()
    n = cfg.n_cycles
    out = np.zeros((n, cols.NCOL + 2 * len(cfg.alphas)))
    starts = list(range(0, n, BLOCK_SIZE))

    def work(b):
        lo = starts[b]
        view = out[lo : lo + BLOCK_SIZE]
        status, at = fn(view, block_state(cfg.seed, b), **args)
        if status:
            raise UnstablePolicy(f"rate does not exceed the drift at cycle {lo + at}")

    threads = threads or default_threads()
    if threads == 1 or len(starts) == 1:
        for b in range(len(starts)):
            work(b)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, range(len(starts))))
    return out, name


def summarize(cfg: SimConfig, data: np.ndarray, backend: str) -> SimReport:
    B = cfg.batch_count
    off_len = data[:, cols.OFF_LEN]
    on_len = data[:, cols.ON_LEN]
    length = off_len + on_len
    intw = data[:, cols.INTW_OFF] + data[:, cols.INTW_ON]
    lst, ylst = [], []
    for j, a in enumerate(cfg.alphas):
        e_off = data[:, cols.NCOL + 2 * j]
        e_on = data[:, cols.NCOL + 2 * j + 1]
        lst.append((float(a), batch_ratio(e_off + e_on, length, B)))
        ylst.append((float(a), batch_ratio(e_on, on_len, B)))
    return SimReport(
        avg_cost=batch_ratio(data[:, cols.COST], length, B),
        mean_workload=batch_ratio(intw, length, B),
        on_fraction=batch_ratio(on_len, length, B),
        ytilde_mean=batch_ratio(data[:, cols.INTW_ON], on_len, B),
        lst_grid=lst,
        ytilde_lst_grid=ylst,
        mean_cycle_length=batch_mean(length, B),
        mean_V=batch_mean(data[:, cols.V_COL], B),
        mean_T_on=batch_mean(on_len, B),
        off_workload_integral=batch_mean(data[:, cols.INTW_OFF], B),
        n_cycles=cfg.n_cycles,
        backend=backend,
        cycles=data,
    )


def run(cfg: SimConfig, threads: Optional[int] = None, kernel: Optional[str] = None) -> SimReport:
    data, name = simulate_cycles(cfg, threads, kernel)
    return summarize(cfg, data, name)


def estimate_ytilde_mean(cfg: SimConfig, threads: Optional[int] = None) -> Estimate:
    """Time-average workload over on periods only."""
    return run(cfg, threads).ytilde_mean
