"""Seeded random instances for every valuation class."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidInstanceError
from .market import Instance
from .valuations import Additive, MultiUnit, SingleMinded, UnitDemand, XoS

CLASSES = ("additive", "unit_demand", "xos", "multi_unit", "single_minded")


@dataclass(frozen=True)
class GenSpec:
    cls: str
    m: int
    n_buyers: int
    supply: tuple[int, int] = (1, 1)
    values: tuple[int, int] = (1, 100)
    clauses: tuple[int, int] = (1, 3)
    seed: int = 0
    zero_prob: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "supply", tuple(int(x) for x in self.supply))
        object.__setattr__(self, "values", tuple(int(x) for x in self.values))
        object.__setattr__(self, "clauses", tuple(int(x) for x in self.clauses))
        if self.cls not in CLASSES:
            raise InvalidInstanceError(f"unknown class {self.cls!r}; expected one of {CLASSES}")
        if self.m < 1 or self.n_buyers < 1:
            raise InvalidInstanceError("m and n_buyers must be positive")
        for name, (lo, hi), floor in (("supply", self.supply, 1), ("values", self.values, 0),
                                       ("clauses", self.clauses, 1)):
            if lo > hi or lo < floor:
                raise InvalidInstanceError(f"{name} range {lo}..{hi} is empty or below {floor}")
        if not 0.0 <= self.zero_prob < 1.0:
            raise InvalidInstanceError("zero_prob must lie in [0, 1)")

    def to_json(self) -> dict:
        d = asdict(self)
        d["class"] = d.pop("cls")
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}

    @classmethod
    def from_json(cls, d: dict) -> "GenSpec":
        d = dict(d)
        if "class" in d:
            d["cls"] = d.pop("class")
        unknown = set(d) - {"cls", "m", "n_buyers", "supply", "values", "clauses", "seed", "zero_prob"}
        if unknown:
            raise InvalidInstanceError(f"unknown GenSpec fields {sorted(unknown)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise InvalidInstanceError(f"bad GenSpec: {exc}") from exc


def _vals(rng, spec: GenSpec, size) -> list[int]:
    lo, hi = spec.values
    x = rng.integers(lo, hi + 1, size=size)
    if spec.zero_prob > 0:
        x = np.where(rng.random(size) < spec.zero_prob, 0, x)
    return [int(v) for v in np.ravel(x)]


def _buyer(rng, spec: GenSpec):
    m = spec.m
    if spec.cls == "additive":
        return Additive(_vals(rng, spec, m))
    if spec.cls == "unit_demand":
        return UnitDemand(_vals(rng, spec, m))
    if spec.cls == "xos":
        n_c = int(rng.integers(spec.clauses[0], spec.clauses[1] + 1))
        return XoS([_vals(rng, spec, m) for _ in range(n_c)])
    if spec.cls == "multi_unit":
        half = m // 2
        steps = _vals(rng, spec, max(half, 1))[:half]
        w = [0]
        for s in steps:
            w.append(w[-1] + s)
        w.extend([w[-1]] * (m - half))
        return MultiUnit(w)
    size = int(rng.integers(1, min(3, m) + 1))
    goods = rng.choice(m, size=size, replace=False)
    return SingleMinded(frozenset(int(i) for i in goods), _vals(rng, spec, 1)[0])


def generate(spec: GenSpec, index: int | None = None) -> Instance:
    """One instance; ``index`` selects a member of the seeded family for batches."""
    rng = np.random.default_rng(spec.seed if index is None else [spec.seed, index])
    if spec.cls == "multi_unit":
        supply = (1,) * spec.m
    else:
        lo, hi = spec.supply
        supply = tuple(int(k) for k in rng.integers(lo, hi + 1, size=spec.m))
    return Instance(supply, tuple(_buyer(rng, spec) for _ in range(spec.n_buyers)))


def generate_batch(spec: GenSpec, count: int) -> list[Instance]:
    return [generate(spec, i) for i in range(count)]
