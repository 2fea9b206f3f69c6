"""JSON encoding for instances, solutions and traces.

Rationals are written as an int or a "num/den" string; an unavailable
price is ``null``.
"""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .errors import InvalidInstanceError
from .item_halving import CoreTrace, Round
from .market import Allocation, Instance, PricingSolution
from .mechanisms import ExplicitOrders, UniformOrders
from .multiunit import HalvingStep, MultiUnitSolution
from .price_doubling import ReductionStep, ReductionTrace
from .rational import UNAVAILABLE, as_fraction, format_rational
from .valuations import Additive, MultiUnit, SingleMinded, UnitDemand, XoS


def _r(x):
    return format_rational(x)


def _q(x) -> Fraction:
    try:
        return as_fraction(x)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise InvalidInstanceError(f"not a rational: {x!r}") from exc


def price_to_json(p):
    return None if p is UNAVAILABLE else _r(p)


def price_from_json(x):
    return UNAVAILABLE if x is None else _q(x)


def prices_to_json(prices):
    return [price_to_json(p) for p in prices]


def prices_from_json(data):
    return tuple(price_from_json(x) for x in data)


# Valuations and instances ---------------------------------------------------------


def valuation_to_json(v) -> dict:
    if isinstance(v, Additive):
        return {"type": "additive", "values": [_r(x) for x in v.values]}
    if isinstance(v, UnitDemand):
        return {"type": "unit_demand", "values": [_r(x) for x in v.values]}
    if isinstance(v, XoS):
        return {"type": "xos", "clauses": [[_r(x) for x in c] for c in v.clauses]}
    if isinstance(v, MultiUnit):
        return {"type": "multi_unit", "values": [_r(x) for x in v.values]}
    if isinstance(v, SingleMinded):
        return {"type": "single_minded", "set": sorted(v.demand_set), "value": _r(v.value)}
    raise InvalidInstanceError(f"cannot serialise {type(v).__name__}")


def valuation_from_json(d: dict):
    if not isinstance(d, dict) or "type" not in d:
        raise InvalidInstanceError(f"valuation must be an object with a 'type' field, got {d!r}")
    kind = d["type"]
    try:
        if kind == "additive":
            return Additive([_q(x) for x in d["values"]])
        if kind == "unit_demand":
            return UnitDemand([_q(x) for x in d["values"]])
        if kind == "xos":
            return XoS([[_q(x) for x in c] for c in d["clauses"]])
        if kind == "multi_unit":
            return MultiUnit([_q(x) for x in d["values"]])
        if kind == "single_minded":
            return SingleMinded(frozenset(int(i) for i in d["set"]), _q(d["value"]))
    except KeyError as exc:
        raise InvalidInstanceError(f"{kind} valuation is missing field {exc}") from exc
    raise InvalidInstanceError(f"unknown valuation type {kind!r}")


def instance_to_json(inst: Instance) -> dict:
    return {"goods": inst.m, "supply": list(inst.supply), "buyers": [valuation_to_json(v) for v in inst.buyers]}


def instance_from_json(d: dict) -> Instance:
    try:
        buyers = []
        for j, b in enumerate(d["buyers"]):
            try:
                buyers.append(valuation_from_json(b))
            except InvalidInstanceError as exc:
                raise InvalidInstanceError(f"buyer {j}: {exc}") from exc
        supply = d.get("supply")
        if supply is None:
            supply = [1] * int(d["goods"])
        if "goods" in d and int(d["goods"]) != len(supply):
            raise InvalidInstanceError(f"'goods' is {d['goods']} but supply lists {len(supply)} goods")
        return Instance(tuple(int(k) for k in supply), tuple(buyers))
    except (KeyError, TypeError) as exc:
        raise InvalidInstanceError(f"malformed instance: {exc}") from exc


def allocation_to_json(A: Allocation) -> dict:
    return {"bundles": [sorted(b) for b in A.bundles]}


def allocation_from_json(d: dict) -> Allocation:
    return Allocation.of(d["bundles"])


def solution_to_json(sol: PricingSolution) -> dict:
    out = {"prices": prices_to_json(sol.prices), "caps": list(sol.caps), **allocation_to_json(sol.allocation)}
    if sol.meta:
        out["meta"] = sol.meta
    return out


def solution_from_json(d: dict) -> PricingSolution:
    return PricingSolution(prices_from_json(d["prices"]), tuple(d["caps"]), allocation_from_json(d),
                           dict(d.get("meta", {})))


# Traces ------------------------------------------------------------------------------


def core_trace_to_json(tr: CoreTrace) -> dict:
    return {
        "kind": "core_trace",
        "instance": instance_to_json(tr.instance),
        "gamma": tr.gamma,
        "epsilon": _r(tr.epsilon),
        "tail_pair": list(tr.tail_pair),
        "selected": tr.selected,
        "meta": tr.meta,
        "rounds": [
            {
                "benchmark": [sorted(b) for b in r.benchmark.bundles],
                "prices": prices_to_json(r.prices),
                "caps": list(r.caps),
                "sold": [sorted(b) for b in r.sold.bundles],
                "branch": r.branch,
                "order": None if r.order is None else list(r.order),
            }
            for r in tr.rounds
        ],
    }


def core_trace_from_json(d: dict) -> CoreTrace:
    rounds = [
        Round(Allocation.of(r["benchmark"]), prices_from_json(r["prices"]), tuple(r["caps"]),
              Allocation.of(r["sold"]), r["branch"], None if r.get("order") is None else tuple(r["order"]))
        for r in d["rounds"]
    ]
    return CoreTrace(instance_from_json(d["instance"]), int(d["gamma"]), rounds, _q(d["epsilon"]),
                     tuple(d["tail_pair"]), d.get("selected"), dict(d.get("meta", {})))


def reduction_trace_to_json(tr: ReductionTrace) -> dict:
    return {
        "kind": "reduction_trace",
        "instance": instance_to_json(tr.instance),
        "black_box": tr.black_box,
        "alpha": _r(tr.alpha),
        "sw0": _r(tr.sw0),
        "gamma": tr.gamma,
        "selected": tr.selected,
        "base_prices": prices_to_json(tr.base_prices),
        "base_allocation": None if tr.base_allocation is None else [sorted(b) for b in tr.base_allocation.bundles],
        "steps": [
            {"reserve": _r(s.reserve), "prices": prices_to_json(s.prices),
             "bundles": [sorted(b) for b in s.allocation.bundles], "augmented_counts": list(s.augmented_counts)}
            for s in tr.steps
        ],
    }


def reduction_trace_from_json(d: dict) -> ReductionTrace:
    steps = [ReductionStep(_q(s["reserve"]), prices_from_json(s["prices"]), Allocation.of(s["bundles"]),
                           tuple(s["augmented_counts"])) for s in d["steps"]]
    base = d.get("base_allocation")
    return ReductionTrace(instance_from_json(d["instance"]), d["black_box"], _q(d["alpha"]), _q(d["sw0"]),
                          int(d["gamma"]), steps, d.get("selected"), prices_from_json(d.get("base_prices", [])),
                          None if base is None else Allocation.of(base))


def multiunit_to_json(sol: MultiUnitSolution) -> dict:
    return {
        "kind": "multiunit_solution",
        "price": _r(sol.price),
        "quantities": list(sol.quantities),
        "case": sol.case,
        "gamma": sol.gamma,
        "p_prime": _r(sol.p_prime),
        "initial": list(sol.initial),
        "selected": sol.selected,
        "epsilon": None if sol.epsilon is None else _r(sol.epsilon),
        "steps": [{"benchmark": list(s.benchmark), "price": _r(s.price), "demand": list(s.demand)} for s in sol.steps],
    }


def multiunit_from_json(d: dict) -> MultiUnitSolution:
    steps = [HalvingStep(tuple(s["benchmark"]), _q(s["price"]), tuple(s["demand"])) for s in d.get("steps", [])]
    eps = d.get("epsilon")
    return MultiUnitSolution(_q(d["price"]), tuple(d["quantities"]), d["case"], int(d.get("gamma", 1)),
                             _q(d.get("p_prime", 0)), tuple(d.get("initial", ())), steps, d.get("selected"),
                             None if eps is None else _q(eps))


def distribution_from_json(d: dict, n_buyers: int):
    if d.get("type") == "uniform":
        return UniformOrders(n_buyers)
    if d.get("type") == "explicit":
        return ExplicitOrders(tuple(tuple(o) for o in d["orders"]), tuple(_q(w) for w in d.get("weights", ())))
    raise InvalidInstanceError(f"unknown distribution {d!r}")


def read_json(path) -> dict:
    try:
        with Path(path).open() as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InvalidInstanceError(f"{path}: invalid JSON ({exc})") from exc


def write_json(data, path=None) -> str:
    text = json.dumps(data, indent=2)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text
