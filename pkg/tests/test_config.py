import json
import math

import pytest

from levyrate.config import SchemaError, load_model, parse_model
from levyrate.errors import ModelError
from levyrate.steady_state import ExpTimer, FixedTime

BASE = {
    "input": {"drift": 0, "poisson_rate": 1, "jump": {"type": "exponential", "params": {"rate": 1}}},
    "workload_V": "from_input_first_jump",
    "off": {"rule": {"type": "first_jump"}},
    "costs": {"h": 1, "K": 1, "d": 1, "r": 2},
}


def patched(**kw):
    raw = json.loads(json.dumps(BASE))
    raw.update(kw)
    return raw


def test_base_model():
    m = parse_model(BASE)
    c = m.constants()
    assert (c.K1, c.K2, c.K3) == (5.0, 3.0, 2.0)
    assert m.off.mean_tau == 1.0


def test_linear_overrides():
    raw = patched(solver={"overrides": {"rho": 1.0, "mu": 0.5, "K1": {"const": 1, "K": 2, "h": 3, "d": 4}, "K3": 7}})
    c = parse_model(raw).constants()
    assert c.K1 == 10 and c.K3 == 7 and c.mu == 0.5
    assert parse_model(raw).with_cost("K", 5).constants().K1 == 18


def test_unbounded_rate_and_injected_term():
    raw = patched(costs={"h": 2, "K": 1, "d": 0, "r": "inf"},
                  off={"rule": {"type": "first_jump"}, "injected_hEtauEZ": 3.0})
    m = parse_model(raw)
    assert math.isinf(m.costs.r)
    assert m.off.off_mean_workload_product == 1.5
    assert m.constants().K1 == pytest.approx(3.0 + 1.0)


def test_timer_rules_and_explicit_workload():
    raw = patched(workload_V={"type": "uniform", "params": {"a": 0.5, "b": 1.5}},
                  off={"rule": {"type": "exp_timer", "rate": 4}})
    m = parse_model(raw)
    assert isinstance(m.off.tau_rule, ExpTimer) and m.off.mean_tau == 0.25
    raw["off"] = {"rule": {"type": "fixed_time", "T": 3}}
    assert isinstance(parse_model(raw).off.tau_rule, FixedTime)


@pytest.mark.parametrize("raw", [
    patched(extra=1),
    patched(costs={"h": 1, "K": 1, "d": 1}),
    patched(workload_V={"type": "gamma", "params": {"k": 2}}),
    patched(off={"rule": {"type": "fixed_time"}}),
])
def test_schema_errors(raw):
    with pytest.raises(SchemaError):
        parse_model(raw)


def test_first_jump_workload_needs_first_jump_rule():
    with pytest.raises(ModelError):
        parse_model(patched(off={"rule": {"type": "exp_timer", "rate": 1}}))


def test_json_syntax_error_location(tmp_path):
    p = tmp_path / "m.json"
    p.write_text('{\n "input": [1,\n}')
    with pytest.raises(SchemaError, match="line 3"):
        load_model(str(p))


def test_shipped_models_parse():
    import pathlib
    root = pathlib.Path(__file__).resolve().parent.parent / "models"
    files = sorted(root.glob("*.json"))
    assert files
    for f in files:
        load_model(str(f))
