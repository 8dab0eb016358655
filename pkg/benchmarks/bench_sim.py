"""Cycles per second of the compiled and pure-Python simulator kernels.

    python3 benchmarks/bench_sim.py [--cycles N] [--repeat K]

Both kernels run the same M/M/1 model (unit rates, constant service rate 2)
on one thread; the script also checks that their outputs agree bit for bit.
"""

import argparse
import time

import numpy as np

from levyrate import CostParams, ConstantRate, Exponential, OffPeriodSpec, compound_poisson
from levyrate.sim import SimConfig, simulate_cycles
from levyrate.sim.kernel import compiled_simulate_block


def timed(cfg, kernel, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out, _ = simulate_cycles(cfg, threads=1, kernel=kernel)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cycles", type=int, default=40_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    exp = compound_poisson(1.0, Exponential(1.0))
    cfg = SimConfig(exp, OffPeriodSpec.first_jump(exp), ConstantRate(2.0),
                    CostParams(h=1, K=1, d=1, r=2), n_cycles=args.cycles, seed=1)

    t_py, out_py = timed(cfg, "python", args.repeat)
    print(f"python    {t_py:8.3f} s  {args.cycles / t_py:12.0f} cycles/s")
    if compiled_simulate_block is None:
        print("compiled  not built")
        return
    t_c, out_c = timed(cfg, "compiled", args.repeat)
    print(f"compiled  {t_c:8.3f} s  {args.cycles / t_c:12.0f} cycles/s")
    print(f"speedup   {t_py / t_c:8.1f}x")
    print(f"identical {np.array_equal(out_py, out_c)}")


if __name__ == "__main__":
    main()
