import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from levyrate.cli import PARTIAL_HEADER, SIM_HEADER, SOLVE_HEADER, SWEEP_HEADER, main
from levyrate.config import load_model
from levyrate.ratesearch import GCurve, G_of

from oracles import G_grid

MM1 = {
    "input": {"drift": 0, "poisson_rate": 1, "jump": {"type": "exponential", "params": {"rate": 1}}},
    "workload_V": "from_input_first_jump",
    "off": {"rule": {"type": "first_jump"}},
    "costs": {"h": 1, "K": 1, "d": 1, "r": 2},
    "sim": {"n_cycles": 40000, "seed": 7, "batch_count": 32},
}

UNIF = {
    "input": {"drift": 0, "poisson_rate": 0.5, "jump": {"type": "uniform", "params": {"a": 0, "b": 1}}},
    "workload_V": "from_input_first_jump",
    "off": {"rule": {"type": "first_jump"}},
    "costs": {"h": 1, "K": 200, "d": 1, "r": 2},
    "solver": {"backend": "uniform", "overrides": {
        "rho": 1.0, "mu": 7 / 12,
        "K1": {"K": 1, "d": 1, "h": 0.625}, "K2": {"d": 1, "h": 7 / 6}, "K3": 2.5}},
}


def with_(base, **patch):
    out = json.loads(json.dumps(base))
    for path, val in patch.items():
        node = out
        keys = path.split("__")
        for k in keys[:-1]:
            node = node.setdefault(k, {})
        node[keys[-1]] = val
    return out


def write(tmp_path, model, name="m.json"):
    p = tmp_path / name
    p.write_text(json.dumps(model))
    return str(p)


def read(path, header):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == header
    return [dict(zip(header, r)) for r in rows[1:]]


def summary(rows):
    return {r["name"]: float(r["value"]) for r in rows if r["record"] == "summary"}


def test_solve_uniform_matches_grid(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["solve", write(tmp_path, UNIF), "--out", str(out)]) == 0
    s = summary(read(out, SOLVE_HEADER))
    m = load_model(write(tmp_path, UNIF))
    curve = GCurve(m.constants(), m.vdist, "uniform")
    lam_g, _, _, _ = G_grid(lambda l: G_of(curve, l), 0, s["lambda_star"])
    assert abs(s["lambda_min"] - lam_g) <= 1e-5
    assert s["K3"] == 2.5


def test_solve_empty_bracket_gives_full_rate(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["solve", write(tmp_path, MM1), "--out", str(out)]) == 0
    rows = read(out, SOLVE_HEADER)
    s = summary(rows)
    assert s["lambda_min"] == 0.0 and s["lambda_star"] == 0.0
    rates = [float(r["value"]) for r in rows if r["record"] == "rate"]
    assert len(rates) > 10 and set(rates) == {2.0}


def test_solve_exponential_self_consistent(tmp_path):
    out = tmp_path / "s.csv"
    model = with_(MM1, costs__K=75)
    assert main(["solve", write(tmp_path, model), "--out", str(out)]) == 0
    s = summary(read(out, SOLVE_HEADER))
    m = load_model(write(tmp_path, model))
    assert s["G_min"] == pytest.approx(float(G_of(GCurve(m.constants(), m.vdist), s["lambda_min"])), rel=1e-7)
    assert (s["K1"], s["K2"], s["K3"]) == (pytest.approx(79.0), pytest.approx(3.0), pytest.approx(2.0))


def test_sweep_orders_and_matches_solve(tmp_path):
    out = tmp_path / "w.csv"
    assert main(["sweep", write(tmp_path, MM1), "--param", "K", "--values", "1,75,200", "--out", str(out)]) == 0
    rows = read(out, SWEEP_HEADER)
    mins = [(float(r["param_value"]), float(r["lambda"]), float(r["G"])) for r in rows if r["record"] == "minimum"]
    lam = [m[1] for m in mins]
    assert lam == sorted(lam)
    single = tmp_path / "one.csv"
    solved = tmp_path / "s.csv"
    main(["sweep", write(tmp_path, MM1), "--param", "K", "--values", "75", "--out", str(single)])
    main(["solve", write(tmp_path, with_(MM1, costs__K=75)), "--out", str(solved)])
    one = [r for r in read(single, SWEEP_HEADER) if r["record"] == "minimum"][0]
    s = summary(read(solved, SOLVE_HEADER))
    assert float(one["lambda"]) == s["lambda_min"] and float(one["G"]) == s["G_min"]


def test_sweep_uniform_seam_continuity(tmp_path):
    out = tmp_path / "w.csv"
    main(["sweep", write(tmp_path, UNIF), "--param", "K", "--values", "200",
          "--lambda-grid", "0.4:0.6:20001", "--out", str(out)])
    G = np.array([float(r["G"]) for r in read(out, SWEEP_HEADER) if r["record"] == "curve"])
    # a jump in value or slope at 0.5 would show as a spike in the second difference
    assert np.max(np.abs(np.diff(G, 2))) < 1e-8


def test_simulate_reports_comparisons(tmp_path):
    out = tmp_path / "m.csv"
    assert main(["simulate", write(tmp_path, MM1), "--policy", "constant:2", "--out", str(out)]) == 0
    rows = {(r["quantity"], r["alpha"]): r for r in read(out, SIM_HEADER)}
    cost = rows[("avg_cost", "")]
    assert float(cost["analytic"]) == 2.5
    assert abs(float(cost["z_score"])) < 4


def test_simulate_optimal_beats_full_rate(tmp_path):
    model = with_(MM1, costs__K=75)
    outs = {}
    for pol in ("optimal", "constant:2"):
        out = tmp_path / f"{pol[:3]}.csv"
        assert main(["simulate", write(tmp_path, model), "--policy", pol, "--out", str(out)]) == 0
        outs[pol] = {r["quantity"]: r for r in read(out, SIM_HEADER)}["avg_cost"]
    best, full = outs["optimal"], outs["constant:2"]
    assert float(best["estimate"]) + float(best["half_width"]) < float(full["estimate"]) - float(full["half_width"])


@pytest.mark.parametrize("threads", ["1", "2", "8"])
def test_simulate_bytes_independent_of_threads(tmp_path, threads):
    path = write(tmp_path, MM1)
    ref, out = tmp_path / "ref.csv", tmp_path / "out.csv"
    main(["simulate", path, "--policy", "constant:2", "--threads", "1", "--out", str(ref)])
    main(["simulate", path, "--policy", "constant:2", "--threads", threads, "--out", str(out)])
    assert ref.read_bytes() == out.read_bytes()


PARTIAL = with_(MM1, costs__K=30, partial_info={"p": [0.5, 0.5], "delta": 1.0, "sigma2": 1.0})


def test_partial_segments_by_hand(tmp_path):
    out = tmp_path / "p.csv"
    assert main(["partial", write(tmp_path, PARTIAL), "--out", str(out)]) == 0
    rows = read(out, PARTIAL_HEADER)
    c = {r["name"]: float(r["value"]) for r in rows if r["record"] == "constant"}
    segs = [r for r in rows if r["record"] == "segment"]
    # atoms at 1 and 2 with p = 1/2, mu rho = 1: seams at 0.5 and 1
    mr = 1.0
    expect = [(0, 0, 0), (0.5, 0.5, 0.5), (1.5, 2.5, 4.5)]  # (E V1, E V^2 1, E V^3 1) on each piece
    for seg, (s1, s2, s3) in zip(segs, expect):
        assert float(seg["S"]) == pytest.approx(1 / (4 * mr) * s1)
        assert float(seg["T"]) == pytest.approx(c["K2"] / (2 * mr) * s1)
        assert float(seg["U"]) == pytest.approx(c["K1"] - c["K2"] / (4 * mr) * s2 - 1 / (16 * mr) * s3)
        assert float(seg["Q"]) == pytest.approx(c["K3"] - s2 / (4 * mr))
        assert float(seg["W"]) == pytest.approx(s1 / (2 * mr))
    R = [float(r["value"]) for r in rows if r["record"] == "rate"]
    assert R == sorted(R)


def test_partial_single_count_matches_solve(tmp_path):
    one = with_(MM1, costs__K=30, partial_info={"p": [1.0], "delta": 1.0, "sigma2": 0.0})
    atom = with_(MM1, costs__K=30, workload_V={"type": "deterministic", "params": {"x": 1.0}},
                 off={"rule": {"type": "first_jump"}, "mean_tau": 1.0})
    po, so = tmp_path / "p.csv", tmp_path / "s.csv"
    assert main(["partial", write(tmp_path, one, "a.json"), "--out", str(po)]) == 0
    atom["input"] = {"drift": 0, "poisson_rate": 1, "jump": {"type": "exponential", "params": {"rate": 1}}}
    atom["off"] = {"rule": {"type": "exp_timer", "rate": 1}, "mean_tau": 1.0}
    assert main(["solve", write(tmp_path, atom, "b.json"), "--out", str(so)]) == 0
    p = {r["name"]: float(r["value"]) for r in read(po, PARTIAL_HEADER) if r["record"] == "summary"}
    s = summary(read(so, SOLVE_HEADER))
    assert p["G_min"] == pytest.approx(s["G_min"], rel=1e-12)
    assert p["lambda_min"] == pytest.approx(s["lambda_min"], rel=1e-12)


def test_exit_codes(tmp_path, capsys):
    out = str(tmp_path / "x.csv")
    bad = tmp_path / "bad.json"
    bad.write_text('{"input": {\n  "drift": 0,,\n}')
    assert main(["solve", str(bad), "--out", out]) == 2
    assert "line 2" in capsys.readouterr().err
    assert main(["solve", write(tmp_path, with_(MM1, costs__bogus=1)), "--out", out]) == 2
    assert main(["solve", write(tmp_path, with_(MM1, costs__h=-1)), "--out", out]) == 2
    assert "costs/h" in capsys.readouterr().err
    assert main(["solve", write(tmp_path, with_(MM1, costs__r=0.5)), "--out", out]) == 3
    assert main(["simulate", write(tmp_path, MM1), "--policy", "constant:0.9", "--out", out]) == 4
    assert main(["partial", write(tmp_path, MM1), "--out", out]) == 2


def test_entry_point_runs(tmp_path):
    out = tmp_path / "s.csv"
    proc = subprocess.run([sys.executable, "-m", "levyrate.cli", "solve", write(tmp_path, MM1), "--out", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    read(out, SOLVE_HEADER)
