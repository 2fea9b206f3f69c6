"""Instances, allocations, pricing outcomes and allocation statistics."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InconsistentSolutionError, InvalidInstanceError, PreconditionError, UnsupportedValuationError
from .rational import UNAVAILABLE, as_fraction, is_available
from .valuations import (
    XOS_REPRESENTABLE,
    MultiUnit,
    SingleMinded,
    Valuation,
    value,
    width,
    witness_clause,
)


@dataclass(frozen=True)
class Instance:
    """A market: ``supply[i]`` copies of each good and a list of buyers."""

    supply: tuple[int, ...]
    buyers: tuple[Valuation, ...]

    def __post_init__(self):
        supply = tuple(int(k) for k in self.supply)
        buyers = tuple(self.buyers)
        if not supply:
            raise InvalidInstanceError("instance needs at least one good")
        if not buyers:
            raise InvalidInstanceError("instance needs at least one buyer")
        for i, k in enumerate(supply):
            if k < 1:
                raise InvalidInstanceError(f"good {i}: supply must be a positive integer")
        m = len(supply)
        for j, v in enumerate(buyers):
            w = width(v)
            if w is not None and w != m:
                raise InvalidInstanceError(f"buyer {j}: valuation covers {w} goods, instance has {m}")
            if isinstance(v, MultiUnit) and len(v.values) < m + 1:
                raise InvalidInstanceError(f"buyer {j}: multi-unit table needs {m + 1} entries")
            if isinstance(v, SingleMinded) and max(v.demand_set) >= m:
                raise InvalidInstanceError(f"buyer {j}: demand set mentions a good outside [0, {m})")
        object.__setattr__(self, "supply", supply)
        object.__setattr__(self, "buyers", buyers)

    @property
    def m(self) -> int:
        return len(self.supply)

    @property
    def n_buyers(self) -> int:
        return len(self.buyers)

    @property
    def k(self) -> Fraction:
        return Fraction(sum(self.supply), self.m)

    @property
    def k_max(self) -> int:
        return max(self.supply)


@dataclass(frozen=True)
class Allocation:
    bundles: tuple[frozenset, ...]

    def __post_init__(self):
        object.__setattr__(self, "bundles", tuple(frozenset(int(i) for i in b) for b in self.bundles))

    @classmethod
    def empty(cls, n_buyers: int) -> "Allocation":
        return cls(tuple(frozenset() for _ in range(n_buyers)))

    @classmethod
    def of(cls, bundles: Iterable[Iterable[int]]) -> "Allocation":
        return cls(tuple(frozenset(b) for b in bundles))

    def __len__(self):
        return len(self.bundles)

    def __getitem__(self, j) -> frozenset:
        return self.bundles[j]


@dataclass(frozen=True)
class PricingSolution:
    """A (prices, caps, allocation) triple."""

    prices: tuple
    caps: tuple[int, ...]
    allocation: Allocation
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        prices = tuple(p if p is UNAVAILABLE else as_fraction(p) for p in self.prices)
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "caps", tuple(int(q) for q in self.caps))


def good_counts(A: Allocation, m: int) -> list[int]:
    """k_i(A) for every good."""
    counts = [0] * m
    for b in A.bundles:
        for i in b:
            if not 0 <= i < m:
                raise PreconditionError(f"good {i} out of range")
            counts[i] += 1
    return counts


def holders(A: Allocation, good: int) -> list[int]:
    """N_i(A): buyers holding ``good``, ascending."""
    return [j for j, b in enumerate(A.bundles) if good in b]


def theta(A: Allocation) -> int:
    return sum(len(b) for b in A.bundles)


def feasible(A: Allocation, inst: Instance, caps: Sequence[int] | None = None) -> bool:
    caps = inst.supply if caps is None else caps
    if len(A) != inst.n_buyers:
        return False
    try:
        counts = good_counts(A, inst.m)
    except PreconditionError:
        return False
    return all(c <= q for c, q in zip(counts, caps))


def social_welfare(inst: Instance, A: Allocation) -> Fraction:
    return sum((value(v, b) for v, b in zip(inst.buyers, A.bundles)), Fraction(0))


def revenue(prices: Sequence, A: Allocation) -> Fraction:
    total = Fraction(0)
    for j, b in enumerate(A.bundles):
        for i in b:
            if not is_available(prices[i]):
                raise InconsistentSolutionError(f"buyer {j} holds good {i}, which is unavailable")
            total += prices[i]
    return total


def surplus(inst: Instance, prices: Sequence, A: Allocation) -> Fraction:
    return social_welfare(inst, A) - revenue(prices, A)


def _require_xos(inst: Instance, j: int) -> None:
    if not isinstance(inst.buyers[j], XOS_REPRESENTABLE):
        raise UnsupportedValuationError(
            f"buyer {j} has a {type(inst.buyers[j]).__name__} valuation, which is not XoS-representable",
            buyer=j,
        )


def witness_table(inst: Instance, A: Allocation) -> list[tuple[Fraction, ...] | None]:
    """Witness clause of each buyer's bundle (None for empty bundles)."""
    out = []
    for j, b in enumerate(A.bundles):
        if not b:
            out.append(None)
            continue
        _require_xos(inst, j)
        out.append(witness_clause(inst.buyers[j], b))
    return out


def per_good_utility(inst: Instance, A: Allocation, good: int, _witness=None) -> Fraction:
    """U_i(A): witness-clause value of ``good`` summed over its holders."""
    wt = witness_table(inst, A) if _witness is None else _witness
    return sum((wt[j][good] for j in holders(A, good)), Fraction(0))


def per_good_utilities(inst: Instance, A: Allocation) -> list[Fraction]:
    wt = witness_table(inst, A)
    return [per_good_utility(inst, A, i, wt) for i in range(inst.m)]


def top_buyers(inst: Instance, A: Allocation, good: int, r: int, _witness=None) -> list[int]:
    """Top_i(r, A): the r holders of ``good`` with the largest witness entry.

    Ties go to the smaller buyer index; the result is sorted ascending.
    """
    hs = holders(A, good)
    if not 0 <= r <= len(hs):
        raise PreconditionError(f"r={r} outside [0, {len(hs)}] for good {good}")
    wt = witness_table(inst, A) if _witness is None else _witness
    ranked = sorted(hs, key=lambda j: (-wt[j][good], j))
    return sorted(ranked[:r])


def solution_is_mechanism_valid(sol: PricingSolution, inst: Instance) -> bool:
    """Caps within supply and the allocation within caps."""
    if len(sol.caps) != inst.m or len(sol.prices) != inst.m:
        return False
    if any(not 0 <= q <= k for q, k in zip(sol.caps, inst.supply)):
        return False
    return feasible(sol.allocation, inst, sol.caps)
