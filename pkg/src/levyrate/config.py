"""JSON model files: schema, validation, and construction of model objects."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Any, Optional

import jsonschema

from . import distributions as D
from .cost import CostParams, ProblemConstants, constants_from_moments
from .errors import ModelError
from .levy import LevyExponent
from .partial_info import PartialInfoModel
from .steady_state import ExpTimer, FirstJump, FixedTime, OffPeriodSpec


class SchemaError(ValueError):
    pass


_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}


def _dist_schema(types):
    variants = {
        "exponential": {"rate": _pos},
        "uniform": {"a": _nonneg, "b": _pos},
        "deterministic": {"x": _pos},
        "discrete": {"values": {"type": "array", "items": _pos, "minItems": 1},
                     "probs": {"type": "array", "items": _nonneg, "minItems": 1}},
        "empirical": {"sample": {"type": "array", "items": _pos, "minItems": 1}},
    }
    return {
        "oneOf": [
            {
                "type": "object",
                "properties": {
                    "type": {"const": t},
                    "params": {
                        "type": "object",
                        "properties": variants[t],
                        "required": list(variants[t]),
                        "additionalProperties": False,
                    },
                },
                "required": ["type", "params"],
                "additionalProperties": False,
            }
            for t in types
        ]
    }


_linear = {
    "oneOf": [
        _num,
        {
            "type": "object",
            "properties": {"const": _num, "K": _num, "h": _num, "d": _num},
            "additionalProperties": False,
        },
    ]
}

SCHEMA = {
    "type": "object",
    "properties": {
        "input": {
            "type": "object",
            "properties": {
                "drift": _nonneg,
                "poisson_rate": _nonneg,
                "jump": _dist_schema(["exponential", "uniform", "deterministic", "discrete"]),
            },
            "additionalProperties": False,
        },
        "workload_V": {
            "oneOf": [
                {"const": "from_input_first_jump"},
                _dist_schema(["exponential", "uniform", "deterministic", "discrete", "empirical"]),
            ]
        },
        "off": {
            "type": "object",
            "properties": {
                "mean_tau": _pos,
                "rule": {
                    "oneOf": [
                        {"type": "object", "properties": {"type": {"const": "first_jump"}},
                         "required": ["type"], "additionalProperties": False},
                        {"type": "object", "properties": {"type": {"const": "fixed_time"}, "T": _pos},
                         "required": ["type", "T"], "additionalProperties": False},
                        {"type": "object", "properties": {"type": {"const": "exp_timer"}, "rate": _pos},
                         "required": ["type", "rate"], "additionalProperties": False},
                    ]
                },
                "injected_hEtauEZ": _nonneg,
            },
            "additionalProperties": False,
        },
        "costs": {
            "type": "object",
            "properties": {
                "h": _pos,
                "K": _pos,
                "d": _nonneg,
                "r": {"oneOf": [_pos, {"const": "inf"}]},
                "r_min": _pos,
            },
            "required": ["h", "K", "d", "r"],
            "additionalProperties": False,
        },
        "solver": {
            "type": "object",
            "properties": {
                "backend": {"enum": ["exponential", "uniform", "discrete", "quadrature"]},
                "golden_rel_tol": _pos,
                "rate_grid": {
                    "type": "object",
                    "properties": {"v_min": _nonneg, "v_max": _pos, "n": {"type": "integer", "minimum": 2}},
                    "additionalProperties": False,
                },
                "overrides": {
                    "type": "object",
                    "properties": {"rho": _pos, "mu": _pos, "K1": _linear, "K2": _linear, "K3": _linear},
                    "additionalProperties": False,
                },
            },
            "additionalProperties": False,
        },
        "sim": {
            "type": "object",
            "properties": {
                "n_cycles": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
                "batch_count": {"type": "integer", "minimum": 2},
                "alphas": {"type": "array", "items": _pos, "minItems": 1, "maxItems": 64},
            },
            "additionalProperties": False,
        },
        "partial_info": {
            "type": "object",
            "properties": {
                "p": {"type": "array", "items": _nonneg, "minItems": 1},
                "delta": _pos,
                "sigma2": _nonneg,
            },
            "required": ["p", "delta", "sigma2"],
            "additionalProperties": False,
        },
    },
    "required": ["input", "workload_V", "off", "costs"],
    "additionalProperties": False,
}


def build_dist(spec: dict) -> D.Distribution:
    t, p = spec["type"], spec["params"]
    if t == "exponential":
        return D.Exponential(p["rate"])
    if t == "uniform":
        return D.Uniform(p["a"], p["b"])
    if t == "deterministic":
        return D.Deterministic(p["x"])
    if t == "discrete":
        return D.DiscreteAtoms(tuple(p["values"]), tuple(p["probs"]))
    return D.Empirical(p["sample"])


@dataclass(frozen=True)
class Model:
    raw: dict
    exp: LevyExponent
    vdist: D.Distribution
    off: OffPeriodSpec
    costs: CostParams

    @property
    def solver(self) -> dict:
        return self.raw.get("solver", {})

    @property
    def sim(self) -> dict:
        return self.raw.get("sim", {})

    def constants(self) -> ProblemConstants:
        """Constants from primitives, with any overrides applied."""
        ov = self.solver.get("overrides", {})
        exp = self.exp
        rho = ov.get("rho", exp.rho)
        mu = ov.get("mu", exp.mu)
        base = constants_from_moments(rho, mu, self.vdist, self.off, self.costs)
        vals = {}
        for key in ("K1", "K2", "K3"):
            if key in ov:
                vals[key] = _eval_linear(ov[key], self.costs)
        return replace(base, **vals)

    def with_cost(self, name: str, value: float) -> "Model":
        costs = replace(self.costs, **{name: value})
        raw = dict(self.raw)
        raw["costs"] = dict(raw["costs"], **{name: value})
        return replace(self, costs=costs, raw=raw)

    def partial(self) -> Optional[PartialInfoModel]:
        pi = self.raw.get("partial_info")
        if pi is None:
            return None
        return PartialInfoModel.from_probs(pi["p"], pi["delta"], pi["sigma2"], self.exp, self.off, self.costs)


def _eval_linear(spec: Any, costs: CostParams) -> float:
    if isinstance(spec, (int, float)):
        return float(spec)
    return spec.get("const", 0.0) + spec.get("K", 0.0) * costs.K + spec.get("h", 0.0) * costs.h + spec.get("d", 0.0) * costs.d


def parse_model(raw: dict) -> Model:
    """Validate against SCHEMA and build model objects.

    Raises SchemaError for structural problems, ModelError for bad values.
    """
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as err:
        path = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise SchemaError(f"at {path}: {err.message}") from None

    inp = raw["input"]
    jump = build_dist(inp["jump"]) if "jump" in inp else None
    rate = inp.get("poisson_rate", 0.0) if jump is not None else 0.0
    exp = LevyExponent(c=inp.get("drift", 0.0), poisson_rate=rate, jumps=jump)

    off_raw = raw["off"]
    rule_raw = off_raw.get("rule", {"type": "first_jump"})
    if rule_raw["type"] == "first_jump":
        if not exp.has_jumps:
            raise ModelError("first_jump rule needs a jump component")
        rule, default_tau = FirstJump(), 1.0 / exp.poisson_rate
    elif rule_raw["type"] == "fixed_time":
        rule, default_tau = FixedTime(rule_raw["T"]), rule_raw["T"]
    else:
        rule, default_tau = ExpTimer(rule_raw["rate"]), 1.0 / rule_raw["rate"]

    if raw["workload_V"] == "from_input_first_jump":
        if jump is None or exp.c != 0 or rule_raw["type"] != "first_jump":
            raise ModelError("from_input_first_jump needs driftless jumps and the first_jump rule")
        vdist = jump
    else:
        vdist = build_dist(raw["workload_V"])

    r = raw["costs"]["r"]
    costs = CostParams(
        h=raw["costs"]["h"],
        K=raw["costs"]["K"],
        d=raw["costs"]["d"],
        r=math.inf if r == "inf" else float(r),
        r_min=raw["costs"].get("r_min"),
    )
    # the file carries the full holding term h * E tau * E Z
    off = OffPeriodSpec(
        mean_tau=off_raw.get("mean_tau", default_tau),
        off_mean_workload_product=off_raw.get("injected_hEtauEZ", 0.0) / costs.h,
        tau_rule=rule,
    )
    return Model(raw, exp, vdist, off, costs)


def load_model(path: str) -> Model:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as err:
        raise SchemaError(f"line {err.lineno}, column {err.colno}: {err.msg}") from None
    return parse_model(raw)
