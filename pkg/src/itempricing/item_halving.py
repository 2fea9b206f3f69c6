"""Item halving for XoS buyers.

Starting from a high-welfare allocation ``A`` the core loop posts prices
proportional to each good's average witness utility, runs the sequential
mechanism with supply capped at the benchmark's usage, and shrinks the
benchmark until at most a couple of items remain.  A final tail round
sells the single most valuable (buyer, good) pair.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .config import DEFAULT_LIMITS, Limits
from .errors import (
    ChargingViolationError,
    DegenerateInstanceError,
    InconsistentSolutionError,
    PreconditionError,
    UnsupportedValuationError,
)
from .market import (
    Allocation,
    Instance,
    PricingSolution,
    feasible,
    good_counts,
    per_good_utility,
    revenue,
    theta,
    top_buyers,
    witness_table,
)
from .mechanisms import all_orders, sequential_run, worst_order_outcome
from .rational import UNAVAILABLE, Rational, as_fraction, ceil_fraction, ceil_log2
from .valuations import XOS_REPRESENTABLE, max_single_item, single_value, value

CARRYOVER = "sold-carryover"
ALLOC_UNSOLD = "alloc-unsold"
TAIL = "tail"


# Arrival-order strategies -------------------------------------------------------


@dataclass(frozen=True)
class Fixed:
    order: tuple[int, ...]

    def choose(self, inst, prices, caps, round_index, cap=None):
        return tuple(self.order)


@dataclass(frozen=True)
class Adversarial:
    """Pick the order in ``orders`` with the smallest revenue."""

    orders: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        orders = tuple(tuple(o) for o in self.orders)
        if not orders:
            raise PreconditionError("adversarial strategy needs a non-empty order set")
        object.__setattr__(self, "orders", orders)

    @classmethod
    def all(cls, n_buyers: int, cap: int | None = None) -> "Adversarial":
        return cls(tuple(all_orders(n_buyers, cap)))

    def choose(self, inst, prices, caps, round_index, cap=None):
        return worst_order_outcome(inst, prices, caps, self.orders, cap)[0]


@dataclass(frozen=True)
class RandomSampling:
    """Draw ``samples`` orders from ``sampler`` and keep the worst one.

    Round ``t`` uses ``default_rng([seed, t])`` so each round is
    reproducible on its own.
    """

    sampler: object
    samples: int
    seed: int = 0

    def __post_init__(self):
        if self.samples < 1:
            raise PreconditionError("sample count must be at least 1")

    def choose(self, inst, prices, caps, round_index, cap=None):
        rng = np.random.default_rng([self.seed, round_index])
        return gamma_random(inst, prices, caps, self.sampler, self.samples, rng, cap)


def gamma_random(inst: Instance, prices, caps, sampler, samples: int, seed, cap=None) -> tuple[int, ...]:
    """Minimum-revenue order among ``samples`` draws; the first drawn wins ties."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    draws = [sampler.draw(rng) for _ in range(max(1, samples))]
    return worst_order_outcome(inst, prices, caps, draws, cap)[0]


def sample_count(inst: Instance) -> int:
    """T = max(1, ceil(log2((log2 m + log2 k) * N * m)))."""
    spread = math.log2(inst.m) + math.log2(inst.k)
    arg = spread * inst.n_buyers * inst.m
    if arg <= 1:
        return 1
    return max(1, math.ceil(math.log2(arg)))


# Core loop ------------------------------------------------------------------------


def xos_gamma(inst: Instance) -> int:
    return max(1, ceil_log2(inst.m * ceil_fraction(inst.k)) + 1)


def prices_fn(inst: Instance, B: Allocation, gamma: int) -> tuple:
    """p_i = U_i(B) / (2 gamma k_i(B)); goods unused by B are unavailable."""
    if gamma < 1:
        raise PreconditionError("gamma must be at least 1")
    counts = good_counts(B, inst.m)
    wt = witness_table(inst, B)
    out = []
    for i, k in enumerate(counts):
        if k == 0:
            out.append(UNAVAILABLE)
        else:
            out.append(per_good_utility(inst, B, i, wt) / (2 * gamma * k))
    return tuple(out)


def alloc_unsold(inst: Instance, B: Allocation, S: Allocation) -> Allocation:
    """Hand each unsold copy back to the benchmark holders who value it most."""
    kB, kS = good_counts(B, inst.m), good_counts(S, inst.m)
    for i, (b, s) in enumerate(zip(kB, kS)):
        if s > b:
            raise InconsistentSolutionError(f"good {i}: {s} copies sold but only {b} in the benchmark")
    wt = witness_table(inst, B)
    bundles = [set() for _ in range(inst.n_buyers)]
    for i in range(inst.m):
        q = kB[i] - kS[i]
        if q > 0:
            for j in top_buyers(inst, B, i, q, wt):
                bundles[j].add(i)
    return Allocation.of(bundles)


@dataclass(frozen=True)
class Round:
    benchmark: Allocation
    prices: tuple
    caps: tuple[int, ...]
    sold: Allocation
    branch: str
    order: tuple[int, ...] | None = None


@dataclass
class CoreTrace:
    instance: Instance
    gamma: int
    rounds: list[Round]
    epsilon: Fraction
    tail_pair: tuple[int, int]
    selected: int | None = None  # 0-based
    meta: dict = field(default_factory=dict)

    @property
    def revenues(self) -> list[Fraction]:
        return [revenue(r.prices, r.sold) for r in self.rounds]

    @property
    def initial(self) -> Allocation:
        return self.rounds[0].benchmark

    def solution(self, index: int | None = None) -> PricingSolution:
        t = self.selected if index is None else index
        if t is None:
            raise PreconditionError("no round selected")
        r = self.rounds[t]
        return PricingSolution(r.prices, r.caps, r.sold, {"round": t + 1, "branch": r.branch})


def _require_xos_buyers(inst: Instance) -> None:
    for j, v in enumerate(inst.buyers):
        if not isinstance(v, XOS_REPRESENTABLE):
            raise UnsupportedValuationError(
                f"buyer {j} has a {type(v).__name__} valuation; item halving needs XoS-representable buyers",
                buyer=j,
            )


def tail_epsilon(v_star: Fraction, epsilon: Rational | None = None, factor: Fraction | None = None) -> Fraction:
    if epsilon is not None:
        eps = as_fraction(epsilon)
        if eps < 0 or (v_star > 0 and eps >= v_star):
            raise PreconditionError(f"epsilon {eps} must lie in [0, {v_star})")
        return eps
    factor = DEFAULT_LIMITS.epsilon_factor if factor is None else as_fraction(factor)
    return v_star * factor


def core_run(inst: Instance, A: Allocation, gamma: int, strategy, epsilon: Rational | None = None,
             epsilon_factor: Fraction | None = None, cap: int | None = None) -> CoreTrace:
    """Run the halving loop for ``gamma - 1`` rounds, then the tail round."""
    _require_xos_buyers(inst)
    if gamma < 1:
        raise PreconditionError("gamma must be at least 1")
    if not feasible(A, inst):
        raise PreconditionError("initial allocation is not feasible")
    if theta(A) < 1:
        raise DegenerateInstanceError("initial allocation assigns no items")
    rounds: list[Round] = []
    B = A
    for t in range(1, gamma):
        p = prices_fn(inst, B, gamma)
        caps = tuple(good_counts(B, inst.m))
        order = tuple(strategy.choose(inst, p, caps, t, cap))
        S = sequential_run(inst, p, caps, order, cap)
        if 2 * theta(S) <= theta(B):
            branch, nxt = CARRYOVER, S
        else:
            branch, nxt = ALLOC_UNSOLD, alloc_unsold(inst, B, S)
        rounds.append(Round(B, p, caps, S, branch, order))
        B = nxt
    j_star, i_star = max_single_item(inst)
    v_star = single_value(inst.buyers[j_star], i_star)
    eps = tail_epsilon(v_star, epsilon, epsilon_factor)
    p_tail = tuple(v_star - eps if i == i_star else UNAVAILABLE for i in range(inst.m))
    caps_tail = tuple(1 if i == i_star else 0 for i in range(inst.m))
    sold = Allocation.of([{i_star} if j == j_star else () for j in range(inst.n_buyers)])
    rounds.append(Round(B, p_tail, caps_tail, sold, TAIL, None))
    return CoreTrace(inst, gamma, rounds, eps, (j_star, i_star))


def select_max_revenue(trace: CoreTrace) -> int:
    revs = trace.revenues
    if not revs:
        raise PreconditionError("empty trace")
    return max(range(len(revs)), key=lambda t: (revs[t], -t))


def select_first_threshold(trace: CoreTrace, bound: Rational) -> int:
    revs = trace.revenues
    if not revs:
        raise PreconditionError("empty trace")
    for t, r in enumerate(revs):
        if r >= bound:
            return t
    raise ChargingViolationError(f"no round reaches revenue {bound}; best is {max(revs)}")


# Initial allocations ---------------------------------------------------------------


def greedy_allocation(inst: Instance) -> Allocation:
    """Each copy, goods in id order, goes to the buyer with the largest positive marginal value."""
    bundles = [frozenset() for _ in range(inst.n_buyers)]
    for i in range(inst.m):
        for _ in range(inst.supply[i]):
            best, best_j = Fraction(0), None
            for j, v in enumerate(inst.buyers):
                if i in bundles[j]:
                    continue
                gain = value(v, bundles[j] | {i}) - value(v, bundles[j])
                if gain > best:
                    best, best_j = gain, j
            if best_j is None:
                break
            bundles[best_j] = bundles[best_j] | {i}
    return Allocation(tuple(bundles))


def initial_allocation(inst: Instance, mode: str = "brute", limits: Limits = DEFAULT_LIMITS) -> Allocation:
    if mode == "brute":
        from .verify import brute_optimal_welfare

        return brute_optimal_welfare(inst, limits)[0]
    if mode == "greedy":
        return greedy_allocation(inst)
    raise PreconditionError(f"unknown initial allocation mode {mode!r}")


def solve_xos(inst: Instance, arrival=None, initial: str | Allocation = "brute", gamma: int | None = None,
              epsilon: Rational | None = None, selection: str = "max",
              limits: Limits = DEFAULT_LIMITS) -> tuple[PricingSolution, CoreTrace]:
    """Item pricing for XoS buyers.

    ``arrival`` is a strategy (:class:`Adversarial`, :class:`RandomSampling`
    or :class:`Fixed`); the default is adversarial over every order.
    ``selection="threshold"`` returns the first round whose revenue reaches
    SW(A) / (8 gamma^2) instead of the best round.
    """
    _require_xos_buyers(inst)
    if arrival is None:
        arrival = Adversarial.all(inst.n_buyers, limits.factorial_buyers)
    A = initial if isinstance(initial, Allocation) else initial_allocation(inst, initial, limits)
    if theta(A) < 1:
        raise DegenerateInstanceError("initial allocation assigns no items (all-zero market?)")
    g = xos_gamma(inst) if gamma is None else int(gamma)
    trace = core_run(inst, A, g, arrival, epsilon, limits.epsilon_factor, limits.demand_goods)
    if selection == "max":
        trace.selected = select_max_revenue(trace)
    elif selection == "threshold":
        sw_a = sum((value(v, b) for v, b in zip(inst.buyers, A.bundles)), Fraction(0))
        trace.selected = select_first_threshold(trace, sw_a / (8 * g * g))
    else:
        raise PreconditionError(f"unknown selection rule {selection!r}")
    trace.meta["selection"] = selection
    trace.meta["arrival"] = type(arrival).__name__.lower()
    return trace.solution(), trace
