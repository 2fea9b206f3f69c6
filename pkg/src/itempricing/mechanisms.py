"""Posted-price mechanism simulators and arrival-order utilities."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Sequence

import numpy as np

from .config import DEFAULT_LIMITS
from .errors import OversizedInstanceError, PreconditionError
from .market import Allocation, Instance, good_counts, revenue
from .rational import as_fraction, is_available
from .valuations import demand, demand_exhaustive, utility

Order = tuple[int, ...]


def _check_order(order: Sequence[int], n: int) -> Order:
    order = tuple(int(j) for j in order)
    if sorted(order) != list(range(n)):
        raise PreconditionError(f"{order} is not a permutation of range({n})")
    return order


def sequential_run(inst: Instance, prices: Sequence, caps: Sequence[int], order: Sequence[int],
                   cap: int | None = None) -> Allocation:
    """Buyers arrive in ``order`` and each buys a demanded bundle from what is left."""
    order = _check_order(order, inst.n_buyers)
    if len(caps) != inst.m or len(prices) != inst.m:
        raise PreconditionError("prices and caps must have one entry per good")
    for i, (q, k) in enumerate(zip(caps, inst.supply)):
        if not 0 <= q <= k:
            raise PreconditionError(f"cap {q} on good {i} outside [0, {k}]")
    left = [q if is_available(p) else 0 for q, p in zip(caps, prices)]
    bundles: list[frozenset] = [frozenset()] * inst.n_buyers
    for j in order:
        avail = [i for i in range(inst.m) if left[i] > 0]
        S = demand(inst.buyers[j], prices, avail, cap) if avail else frozenset()
        for i in S:
            left[i] -= 1
        bundles[j] = S
    return Allocation(tuple(bundles))


@dataclass(frozen=True)
class SimultaneousReport:
    valid: bool
    buyer: int | None = None
    good: int | None = None
    reason: str = ""

    def __bool__(self):
        return self.valid


def simultaneous_check(inst: Instance, prices: Sequence, A: Allocation, cap: int | None = None) -> SimultaneousReport:
    """Envy-freeness over all priced goods plus supply feasibility."""
    if len(A) != inst.n_buyers:
        return SimultaneousReport(False, reason="allocation has the wrong number of bundles")
    priced = [i for i in range(inst.m) if is_available(prices[i])]
    for j, (v, b) in enumerate(zip(inst.buyers, A.bundles)):
        bad = sorted(i for i in b if not is_available(prices[i]))
        if bad:
            return SimultaneousReport(False, j, bad[0], "holds an unavailable good")
        mine = utility(v, prices, b)
        if len(priced) <= 12:
            best_bundle = demand_exhaustive(v, prices, priced, cap)
        else:
            best_bundle = demand(v, prices, priced, cap)
        best = utility(v, prices, best_bundle)
        if best > mine:
            extra = sorted(best_bundle - b) or sorted(b)
            return SimultaneousReport(False, j, extra[0] if extra else None,
                                      f"utility {mine} below best response {best}")
    counts = good_counts(A, inst.m)
    for i, (c, k) in enumerate(zip(counts, inst.supply)):
        if c > k:
            return SimultaneousReport(False, None, i, f"{c} copies allocated, supply {k}")
    return SimultaneousReport(True)


def all_orders(n: int, cap: int | None = None) -> list[Order]:
    cap = DEFAULT_LIMITS.factorial_buyers if cap is None else cap
    if n > cap:
        raise OversizedInstanceError(f"{n}! orders exceeds the factorial cap ({cap} buyers)")
    return list(permutations(range(n)))


def worst_order_outcome(inst: Instance, prices: Sequence, caps: Sequence[int], orders: Sequence[Sequence[int]],
                        cap: int | None = None) -> tuple[Order, Allocation, Fraction]:
    """Minimum-revenue order among ``orders``; the first listed wins ties."""
    if not orders:
        raise PreconditionError("order set must be non-empty")
    worst = None
    for order in orders:
        A = sequential_run(inst, prices, caps, order, cap)
        rev = revenue(prices, A)
        if worst is None or rev < worst[2]:
            worst = (tuple(order), A, rev)
    return worst


# Arrival distributions ---------------------------------------------------------


@dataclass(frozen=True)
class UniformOrders:
    n: int

    def draw(self, rng: np.random.Generator) -> Order:
        return tuple(int(j) for j in rng.permutation(self.n))

    def support(self, cap: int | None = None) -> list[tuple[Order, Fraction]]:
        orders = all_orders(self.n, cap)
        w = Fraction(1, math.factorial(self.n))
        return [(o, w) for o in orders]


@dataclass(frozen=True)
class ExplicitOrders:
    orders: tuple[Order, ...]
    weights: tuple[Fraction, ...]

    def __post_init__(self):
        orders = tuple(tuple(int(j) for j in o) for o in self.orders)
        if not orders:
            raise PreconditionError("explicit distribution needs at least one order")
        n = len(orders[0])
        for o in orders:
            _check_order(o, n)
        weights = tuple(as_fraction(w) for w in self.weights) if self.weights else (Fraction(1),) * len(orders)
        if len(weights) != len(orders) or any(w < 0 for w in weights) or sum(weights) <= 0:
            raise PreconditionError("weights must be non-negative, one per order, with positive sum")
        object.__setattr__(self, "orders", orders)
        object.__setattr__(self, "weights", weights)

    @property
    def n(self) -> int:
        return len(self.orders[0])

    def draw(self, rng: np.random.Generator) -> Order:
        total = sum(self.weights)
        probs = np.array([float(w / total) for w in self.weights])
        return self.orders[int(rng.choice(len(self.orders), p=probs / probs.sum()))]

    def support(self, cap: int | None = None) -> list[tuple[Order, Fraction]]:
        total = sum(self.weights)
        return [(o, w / total) for o, w in zip(self.orders, self.weights) if w > 0]


def sample_order(sampler, seed) -> Order:
    """One reproducible draw; ``seed`` may be an int, a sequence or a Generator."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return sampler.draw(rng)


def expected_revenue(inst: Instance, prices: Sequence, caps: Sequence[int], sampler,
                     order_cap: int | None = None, demand_cap: int | None = None) -> Fraction:
    """Exact expectation of sequential revenue over the sampler's support."""
    total = Fraction(0)
    for order, w in sampler.support(order_cap):
        total += w * revenue(prices, sequential_run(inst, prices, caps, order, demand_cap))
    return total
