"""levyrate solve|sweep|simulate|partial <model.json> --out <path>

Exit codes: 0 ok, 2 schema/value error, 3 infeasible model (r <= rho),
4 policy not above max(rho, drift).
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from typing import Iterable, Optional

import numpy as np

from .config import Model, SchemaError, load_model
from .cost import steady_cost
from .errors import DivergentMoment, InfeasibleModel, ModelError, UnstablePolicy
from .partial_info import solve_partial
from .policy import AffineRate, ConstantRate, RatePolicy
from .ratesearch import GCurve, G_of, lambda_star, solve_curve
from .sim import SimConfig, run
from .steady_state import FirstJump, mixture_weights, tilted_mass, wtilde_lst, ytilde_lst, ytilde_mean

EXIT_OK, EXIT_SCHEMA, EXIT_INFEASIBLE, EXIT_UNSTABLE = 0, 2, 3, 4

SOLVE_HEADER = ["record", "name", "v", "value"]
SWEEP_HEADER = ["record", "param", "param_value", "lambda", "G"]
SIM_HEADER = ["quantity", "alpha", "estimate", "std_error", "half_width", "analytic", "z_score"]
PARTIAL_HEADER = ["record", "name", "index", "lam_lo", "lam_hi", "S", "T", "U", "Q", "W", "value"]


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return ""
    return repr(x)


def write_csv(path: str, header: list, rows: Iterable[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) if not isinstance(x, str) else x for x in row])


def parse_grid(spec: str) -> np.ndarray:
    """'lo:hi:n' -> linspace."""
    try:
        lo, hi, n = spec.split(":")
        return np.linspace(float(lo), float(hi), int(n))
    except ValueError:
        raise SchemaError(f"bad grid {spec!r}; expected lo:hi:n") from None


def _curve(model: Model) -> GCurve:
    consts = model.constants()
    cap = None
    if model.costs.r_min is not None:
        cap = 1.0 / (model.costs.r_min - consts.rho) - consts.q
    return GCurve(consts, model.vdist, model.solver.get("backend"), cap)


def _solve(model: Model):
    curve = _curve(model)
    return curve, solve_curve(curve, model.costs.r_min, rel_tol=model.solver.get("golden_rel_tol", 1e-8))


def _rate_grid(model: Model) -> np.ndarray:
    g = model.solver.get("rate_grid", {})
    vd = model.vdist
    if vd.atomic and not g:
        return vd.v
    hi = g.get("v_max", min(vd.support[1], vd.quantile(0.999)))
    lo = g.get("v_min", max(vd.support[0], hi * 1e-3))
    return np.linspace(lo, hi, g.get("n", 101))


def cmd_solve(args) -> int:
    model = load_model(args.model)
    curve, sol = _solve(model)
    c, res = sol.constants, sol.search
    summary = [
        ("lambda_min", res.lambda_min),
        ("G_min", res.G_min),
        ("error_bound", res.error_bound),
        ("K1", c.K1),
        ("K2", c.K2),
        ("K3", c.K3),
        ("rho", c.rho),
        ("mu", c.mu),
        ("lambda_star", lambda_star(c)),
        ("alpha", sol.alpha),
    ]
    rows = [["summary", k, None, v] for k, v in summary]
    grid = _rate_grid(model)
    rows += [["rate", "R", v, R] for v, R in zip(grid, sol.policy.rate(grid))]
    write_csv(args.out, SOLVE_HEADER, rows)
    return EXIT_OK


def cmd_sweep(args) -> int:
    model = load_model(args.model)
    values = [float(x) for x in args.values.split(",") if x.strip()]
    if not values:
        raise SchemaError("--values is empty")
    curves, minima = [], []
    for val in values:
        m = model.with_cost(args.param, val)
        curve, sol = _solve(m)
        if args.lambda_grid:
            grid = parse_grid(args.lambda_grid)
        else:
            grid = np.linspace(0.0, max(2 * lambda_star(sol.constants), 1.0), 201)
        G = G_of(curve, grid)
        curves += [["curve", args.param, val, l, g] for l, g in zip(grid, np.atleast_1d(G))]
        minima.append(["minimum", args.param, val, sol.search.lambda_min, sol.search.G_min])
    write_csv(args.out, SWEEP_HEADER, curves + minima)
    return EXIT_OK


def _parse_policy(spec: str, model: Model) -> RatePolicy:
    kind, _, arg = spec.partition(":")
    rho = model.exp.rho
    if kind == "constant":
        return ConstantRate(float(arg))
    if kind == "affine":
        return AffineRate(rho, float(arg))
    if kind == "optimal":
        return _solve(model)[1].policy
    raise SchemaError(f"unknown policy {spec!r}; use constant:R, affine:s or optimal")


def cmd_simulate(args) -> int:
    model = load_model(args.model)
    policy = _parse_policy(args.policy, model)
    sim = model.sim
    cfg = SimConfig(
        model.exp,
        model.off,
        policy,
        model.costs,
        n_cycles=sim.get("n_cycles", 100_000),
        seed=sim.get("seed", 0),
        batch_count=sim.get("batch_count", 32),
        alphas=tuple(sim.get("alphas", (0.5, 1.0, 2.0))),
    )
    rep = run(cfg, threads=args.threads)

    exp, vd, off = model.exp, model.vdist, model.off
    rho = exp.rho

    def analytic(fn):
        try:
            return float(fn())
        except (DivergentMoment, ModelError, ZeroDivisionError):
            return None

    off_zero = isinstance(off.tau_rule, FirstJump) and exp.c == 0
    rows = []

    def add(name, alpha, est, target):
        z = est.z(target) if target is not None else None
        rows.append([name, alpha, est.value, est.std_error, est.half_width, target, z])

    add("avg_cost", None, rep.avg_cost, analytic(lambda: steady_cost(exp, vd, policy, off, model.costs)))
    add("on_fraction", None, rep.on_fraction, analytic(lambda: mixture_weights(vd, policy, off, rho)[1]))
    add("ytilde_mean", None, rep.ytilde_mean, analytic(lambda: ytilde_mean(exp, vd, policy)))
    add("mean_workload", None, rep.mean_workload, None)
    add("mean_cycle_length", None, rep.mean_cycle_length, analytic(lambda: off.mean_tau + tilted_mass(vd, policy, rho)))
    add("mean_V", None, rep.mean_V, analytic(vd.mean))
    add("mean_T_on", None, rep.mean_T_on, analytic(lambda: tilted_mass(vd, policy, rho)))
    add("off_workload_integral", None, rep.off_workload_integral, 0.0 if off_zero else None)
    for a, est in rep.lst_grid:
        target = analytic(lambda: wtilde_lst(exp, vd, policy, off, lambda _: 1.0, a)) if off_zero else None
        add("lst", a, est, target)
    for a, est in rep.ytilde_lst_grid:
        add("ytilde_lst", a, est, analytic(lambda: ytilde_lst(exp, vd, policy, a)))
    write_csv(args.out, SIM_HEADER, rows)
    return EXIT_OK


def cmd_partial(args) -> int:
    model = load_model(args.model)
    pm = model.partial()
    if pm is None:
        raise SchemaError("model has no partial_info section")
    sol = solve_partial(pm)
    c, res = sol.constants, sol.search
    rows = [["constant", k, None, None, None, None, None, None, None, None, getattr(c, k)]
            for k in ("K1", "K2", "K3", "rho", "mu")]
    for seg in res.segments:
        rows.append(["segment", None, seg["lam_hi"], seg["lam_lo"], seg["lam_hi"],
                     seg["S"], seg["T"], seg["U"], seg["Q"], seg["W"], None])
    rows.append(["summary", "lambda_min", None, None, None, None, None, None, None, None, res.lambda_min])
    rows.append(["summary", "G_min", None, None, None, None, None, None, None, None, res.G_min])
    rows.append(["summary", "lambda_star", None, None, None, None, None, None, None, None, lambda_star(c)])
    n = pm.n_dist.v
    for ni, R in zip(n, sol.rate_of_n(n, pm.delta)):
        rows.append(["rate", "R", int(ni), None, None, None, None, None, None, None, R])
    write_csv(args.out, PARTIAL_HEADER, rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="levyrate", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="optimal water-filling policy")
    s.add_argument("model")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("sweep", help="G(lambda) curves over one cost parameter")
    s.add_argument("model")
    s.add_argument("--param", choices=["K", "h", "d"], required=True)
    s.add_argument("--values", required=True, help="comma-separated list")
    s.add_argument("--lambda-grid", default=None, help="lo:hi:n")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("simulate", help="Monte Carlo check of a policy")
    s.add_argument("model")
    s.add_argument("--policy", default="optimal", help="constant:R | affine:s | optimal")
    s.add_argument("--threads", type=int, default=None)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("partial", help="exact solve when only the customer count is seen")
    s.add_argument("model")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_partial)
    return p


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as err:
        print(f"levyrate: schema error: {err}", file=sys.stderr)
        return EXIT_SCHEMA
    except UnstablePolicy as err:
        print(f"levyrate: unstable policy: {err}", file=sys.stderr)
        return EXIT_UNSTABLE
    except InfeasibleModel as err:
        print(f"levyrate: infeasible model: {err}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ModelError, ValueError) as err:
        print(f"levyrate: invalid model: {err}", file=sys.stderr)
        return EXIT_SCHEMA


if __name__ == "__main__":
    sys.exit(main())
