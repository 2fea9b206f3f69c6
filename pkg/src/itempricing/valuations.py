"""Buyer valuation classes and their value, demand and witness oracles.

Bundles are ``frozenset`` objects of good indices.  Prices are sequences
indexed by good holding a Fraction or :data:`UNAVAILABLE`.

Demand tie rule: among utility maximisers pick the smallest cardinality,
then the lexicographically smallest sorted tuple of good ids.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence, Union

import numpy as np

from . import _kernels
from .config import DEFAULT_LIMITS
from .errors import InvalidInstanceError, OversizedInstanceError, PreconditionError, UnsupportedValuationError
from .rational import as_fraction, common_denominator, is_available

Bundle = frozenset


def _values_tuple(values, what: str) -> tuple[Fraction, ...]:
    out = tuple(as_fraction(v) for v in values)
    if any(v < 0 for v in out):
        raise InvalidInstanceError(f"{what}: values must be non-negative")
    return out


@dataclass(frozen=True)
class Additive:
    values: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", _values_tuple(self.values, "additive"))


@dataclass(frozen=True)
class UnitDemand:
    values: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", _values_tuple(self.values, "unit_demand"))


@dataclass(frozen=True)
class XoS:
    clauses: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        clauses = tuple(_values_tuple(c, "xos clause") for c in self.clauses)
        if not clauses:
            raise InvalidInstanceError("xos: at least one clause is required")
        if len({len(c) for c in clauses}) != 1:
            raise InvalidInstanceError("xos: clauses must have equal length")
        object.__setattr__(self, "clauses", clauses)


@dataclass(frozen=True)
class MultiUnit:
    """Value depends only on the number of goods held; ``values[q]`` is w_q."""

    values: tuple[Fraction, ...]

    def __post_init__(self):
        w = _values_tuple(self.values, "multi_unit")
        if not w or w[0] != 0:
            raise InvalidInstanceError("multi_unit: table must start with w_0 = 0")
        if any(a > b for a, b in zip(w, w[1:])):
            raise InvalidInstanceError("multi_unit: table must be non-decreasing")
        object.__setattr__(self, "values", w)

    def at(self, q: int) -> Fraction:
        return self.values[min(q, len(self.values) - 1)]


@dataclass(frozen=True)
class SingleMinded:
    demand_set: frozenset
    value: Fraction

    def __post_init__(self):
        ds = frozenset(int(i) for i in self.demand_set)
        if not ds:
            raise InvalidInstanceError("single_minded: demand set must be non-empty")
        if any(i < 0 for i in ds):
            raise InvalidInstanceError("single_minded: negative good id")
        x = as_fraction(self.value)
        if x < 0:
            raise InvalidInstanceError("single_minded: value must be non-negative")
        object.__setattr__(self, "demand_set", ds)
        object.__setattr__(self, "value", x)


Valuation = Union[Additive, UnitDemand, XoS, MultiUnit, SingleMinded]
XOS_REPRESENTABLE = (Additive, UnitDemand, XoS)


def width(v: Valuation) -> int | None:
    """Number of goods the valuation is written over (None when unconstrained)."""
    if isinstance(v, (Additive, UnitDemand)):
        return len(v.values)
    if isinstance(v, XoS):
        return len(v.clauses[0])
    return None


def value(v: Valuation, bundle: Iterable[int]) -> Fraction:
    T = bundle if isinstance(bundle, frozenset) else frozenset(bundle)
    if not T:
        return Fraction(0)
    if isinstance(v, Additive):
        return sum((v.values[i] for i in T), Fraction(0))
    if isinstance(v, UnitDemand):
        return max(v.values[i] for i in T)
    if isinstance(v, XoS):
        return max(sum((c[i] for i in T), Fraction(0)) for c in v.clauses)
    if isinstance(v, MultiUnit):
        return v.at(len(T))
    if isinstance(v, SingleMinded):
        return v.value if v.demand_set <= T else Fraction(0)
    raise UnsupportedValuationError(f"unknown valuation type {type(v).__name__}")


def single_value(v: Valuation, good: int) -> Fraction:
    return value(v, frozenset((good,)))


def as_xos(v: Valuation) -> XoS:
    """Clause form of an XoS-representable valuation."""
    if isinstance(v, XoS):
        return v
    if isinstance(v, Additive):
        return XoS((v.values,))
    if isinstance(v, UnitDemand):
        m = len(v.values)
        zero = Fraction(0)
        return XoS(tuple(tuple(v.values[i] if g == i else zero for g in range(m)) for i in range(m)))
    raise UnsupportedValuationError(f"{type(v).__name__} valuation has no XoS clause form")


def xos_witness(v: Valuation, bundle: Iterable[int]) -> int:
    """Smallest clause index attaining the value of ``bundle``."""
    if not isinstance(v, XoS):
        raise UnsupportedValuationError(f"xos_witness needs an XoS valuation, got {type(v).__name__}")
    T = frozenset(bundle)
    best, best_l = None, 0
    for l, c in enumerate(v.clauses):
        s = sum((c[i] for i in T), Fraction(0))
        if best is None or s > best:
            best, best_l = s, l
    return best_l


def witness_clause(v: Valuation, bundle: Iterable[int]) -> tuple[Fraction, ...]:
    """The additive clause a buyer uses to value ``bundle``."""
    x = as_xos(v)
    return x.clauses[xos_witness(x, bundle)]


def _resolve_available(prices: Sequence, available) -> list[int]:
    if available is None:
        return [i for i, p in enumerate(prices) if is_available(p)]
    avail = sorted(set(available))
    for i in avail:
        if not 0 <= i < len(prices):
            raise PreconditionError(f"good {i} out of range")
        if not is_available(prices[i]):
            raise PreconditionError(f"good {i} is unavailable but listed as available")
    return avail


def _check_prices(prices: Sequence, avail: Sequence[int]) -> None:
    for i in avail:
        if prices[i] < 0:
            raise PreconditionError(f"negative price on good {i}")


def demand_exhaustive(v: Valuation, prices: Sequence, available=None, cap: int | None = None) -> frozenset:
    """Reference demand by enumeration of every subset of the available goods."""
    avail = _resolve_available(prices, available)
    cap = DEFAULT_LIMITS.demand_goods if cap is None else cap
    if len(avail) > cap:
        raise OversizedInstanceError(f"exhaustive demand over {len(avail)} goods exceeds cap {cap}")
    _check_prices(prices, avail)
    best_set, best_u = frozenset(), Fraction(0)
    for size in range(1, len(avail) + 1):
        for combo in combinations(avail, size):
            T = frozenset(combo)
            u = value(v, T) - sum((prices[i] for i in combo), Fraction(0))
            if u > best_u:
                best_set, best_u = T, u
    return best_set


def _xos_demand(v: XoS, prices: Sequence, avail: list[int], cap: int) -> frozenset:
    if not avail:
        return frozenset()
    if len(avail) > cap:
        raise OversizedInstanceError(f"XoS demand over {len(avail)} goods exceeds cap {cap}")
    cols = [[c[i] for i in avail] for c in v.clauses]
    ps = [prices[i] for i in avail]
    scale = common_denominator([x for row in cols for x in row] + ps)
    scaled_c = [[int(x * scale) for x in row] for row in cols]
    scaled_p = [int(x * scale) for x in ps]
    bound = (max(max(sum(r) for r in scaled_c), sum(scaled_p)) + 1) * 2
    # The numpy path materialises all 2^n subsets; keep it to modest n.
    if bound >= _kernels.INT_LIMIT or (not _kernels.USE_NUMBA and len(avail) > 16):
        return demand_exhaustive(v, prices, avail, cap)
    mask = _kernels.xos_best_subset(np.array(scaled_c, dtype=np.int64), np.array(scaled_p, dtype=np.int64))
    return frozenset(g for b, g in enumerate(avail) if (mask >> b) & 1)


def demand(v: Valuation, prices: Sequence, available=None, cap: int | None = None) -> frozenset:
    """Utility-maximising bundle among ``available`` goods at ``prices``.

    ``available`` defaults to every good with a finite price.  Closed forms
    serve the additive, unit-demand, multi-unit and single-minded classes;
    XoS goes through the exhaustive kernel.
    """
    avail = _resolve_available(prices, available)
    _check_prices(prices, avail)
    cap = DEFAULT_LIMITS.demand_goods if cap is None else cap
    if isinstance(v, Additive):
        return frozenset(i for i in avail if v.values[i] > prices[i])
    if isinstance(v, UnitDemand):
        best, best_u = None, Fraction(0)
        for i in avail:
            u = v.values[i] - prices[i]
            if u > best_u:
                best, best_u = i, u
        return frozenset() if best is None else frozenset((best,))
    if isinstance(v, MultiUnit):
        ranked = sorted(avail, key=lambda i: (prices[i], i))
        best_q, best_u, cost = 0, Fraction(0), Fraction(0)
        for q, i in enumerate(ranked, start=1):
            cost += prices[i]
            u = v.at(q) - cost
            if u > best_u:
                best_q, best_u = q, u
        return frozenset(ranked[:best_q])
    if isinstance(v, SingleMinded):
        if v.demand_set <= set(avail) and v.value > sum((prices[i] for i in v.demand_set), Fraction(0)):
            return v.demand_set
        return frozenset()
    if isinstance(v, XoS):
        return _xos_demand(v, prices, avail, cap)
    raise UnsupportedValuationError(f"unknown valuation type {type(v).__name__}")


def utility(v: Valuation, prices: Sequence, bundle: Iterable[int]) -> Fraction:
    T = frozenset(bundle)
    for i in T:
        if not is_available(prices[i]):
            raise PreconditionError(f"good {i} is unavailable")
    return value(v, T) - sum((prices[i] for i in T), Fraction(0))


def demand_quantity(v: MultiUnit, price, max_q: int, tie_mode: str = "smallest") -> int:
    """Quantity in [0, max_q] maximising w_q - price * q."""
    if not isinstance(v, MultiUnit):
        raise UnsupportedValuationError(f"demand_quantity needs a multi-unit valuation, got {type(v).__name__}")
    if tie_mode not in ("smallest", "largest"):
        raise PreconditionError(f"unknown tie_mode {tie_mode!r}")
    if max_q < 0:
        raise PreconditionError("max_q must be non-negative")
    p = as_fraction(price)
    best_q, best_u = 0, Fraction(0)
    for q in range(1, max_q + 1):
        u = v.at(q) - p * q
        if u > best_u or (tie_mode == "largest" and u == best_u):
            best_q, best_u = q, u
    return best_q


def max_single_item(instance) -> tuple[int, int]:
    """Buyer/good pair with the largest single-good value; ties to smallest (j, i)."""
    best, pair = None, (0, 0)
    for j, v in enumerate(instance.buyers):
        for i in range(instance.m):
            x = single_value(v, i)
            if best is None or x > best:
                best, pair = x, (j, i)
    return pair
