"""Brute-force oracles and exact inequality checkers for pricing traces.

Every checker returns a :class:`CheckReport`.  Round indices in reports are
1-based, matching the way traces are numbered t = 1..gamma.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .config import DEFAULT_LIMITS, Limits
from .errors import OversizedInstanceError
from .market import Allocation, Instance, revenue, social_welfare, surplus, theta
from .mechanisms import sequential_run
from .rational import common_denominator, format_rational
from .valuations import MultiUnit, single_value, value


@dataclass
class CheckReport:
    claim: str
    passed: bool
    index: int | None = None
    lhs: Fraction | None = None
    rhs: Fraction | None = None
    detail: str = ""
    extra: dict = field(default_factory=dict)

    def __bool__(self):
        return self.passed

    def to_json(self) -> dict:
        out = {"claim": self.claim, "passed": self.passed, "index": self.index,
               "lhs": None if self.lhs is None else format_rational(self.lhs),
               "rhs": None if self.rhs is None else format_rational(self.rhs),
               "detail": self.detail}
        for k, v in self.extra.items():
            out[k] = format_rational(v) if isinstance(v, Fraction) else v
        return out


def _fail(claim, index, lhs, rhs, detail=""):
    return CheckReport(claim, False, index, lhs, rhs, detail)


# Welfare oracles -----------------------------------------------------------------


def _all_multiunit_unit_supply(inst: Instance) -> bool:
    return all(isinstance(v, MultiUnit) for v in inst.buyers) and all(k == 1 for k in inst.supply)


def _multiunit_optimum(inst: Instance) -> tuple[Allocation, Fraction]:
    m, n = inst.m, inst.n_buyers
    # best[j][r] = (welfare, -items) achievable by buyers j.. with r units left
    best = [[(Fraction(0), 0)] * (m + 1) for _ in range(n + 1)]
    pick = [[0] * (m + 1) for _ in range(n)]
    for j in range(n - 1, -1, -1):
        w = inst.buyers[j]
        for r in range(m + 1):
            top, arg = None, 0
            for q in range(r + 1):
                fw, fi = best[j + 1][r - q]
                cand = (w.at(q) + fw, fi - q)
                if top is None or cand > top:
                    top, arg = cand, q
            best[j][r], pick[j][r] = top, arg
    bundles, r, nxt = [], m, 0
    for j in range(n):
        q = pick[j][r]
        bundles.append(range(nxt, nxt + q))
        nxt += q
        r -= q
    A = Allocation.of(bundles)
    return A, social_welfare(inst, A)


def brute_optimal_welfare(inst: Instance, limits: Limits = DEFAULT_LIMITS) -> tuple[Allocation, Fraction]:
    """Exact welfare-maximising feasible allocation.

    Among optimal allocations the one with the fewest items wins, so no
    buyer is handed goods it does not value.  Multi-unit markets with one
    copy per good use a quantity DP; everything else runs the supply-state
    DP over all bundles.
    """
    if _all_multiunit_unit_supply(inst):
        return _multiunit_optimum(inst)
    if inst.m > limits.brute_goods or inst.n_buyers > limits.brute_buyers or inst.k_max > limits.brute_supply:
        raise OversizedInstanceError(
            f"brute-force welfare is capped at m<={limits.brute_goods}, N<={limits.brute_buyers}, "
            f"k_i<={limits.brute_supply}; got m={inst.m}, N={inst.n_buyers}, k_max={inst.k_max}")
    m = inst.m
    bundles = [frozenset(i for i in range(m) if (b >> i) & 1) for b in range(1 << m)]
    table = [[value(v, T) for T in bundles] for v in inst.buyers]
    scale = common_denominator(x for row in table for x in row)
    weight = sum(inst.supply) + 1
    sizes = [len(T) for T in bundles]
    scores = [[int(x * scale) * weight - s for x, s in zip(row, sizes)] for row in table]
    bound = max(max(abs(x) for x in row) for row in scores) * (inst.n_buyers + 1)
    if bound < _kernels.INT_LIMIT:
        picks = _kernels.welfare_dp(np.array(scores, dtype=np.int64), inst.supply)
    else:
        picks = _kernels.welfare_dp_numpy(np.array(scores, dtype=object), inst.supply)
    A = Allocation(tuple(bundles[int(b)] for b in picks))
    return A, social_welfare(inst, A)


# Charging sequences --------------------------------------------------------------


@dataclass(frozen=True)
class ChargingSequence:
    """Per-round numbers a charging argument needs (index 0 is round 1)."""

    gamma: int
    benchmark_welfare: tuple[Fraction, ...]
    revenue: tuple[Fraction, ...]
    surplus: tuple[Fraction, ...]
    sold_welfare: tuple[Fraction, ...]

    @classmethod
    def from_trace(cls, trace) -> "ChargingSequence":
        inst = trace.instance
        bw, rv, sp, sw = [], [], [], []
        for r in trace.rounds:
            bw.append(social_welfare(inst, r.benchmark))
            rv.append(revenue(r.prices, r.sold))
            sp.append(surplus(inst, r.prices, r.sold))
            sw.append(social_welfare(inst, r.sold))
        return cls(trace.gamma, tuple(bw), tuple(rv), tuple(sp), tuple(sw))


def _as_sequence(obj) -> ChargingSequence:
    return obj if isinstance(obj, ChargingSequence) else ChargingSequence.from_trace(obj)


def check_generalized_charging(trace, alpha, beta) -> CheckReport:
    """Per-round welfare drops charged to revenue plus a SW/beta leak, then the implied bound."""
    seq = _as_sequence(trace)
    alpha, beta = Fraction(alpha), Fraction(beta)
    g, B, R = len(seq.revenue), seq.benchmark_welfare, seq.revenue
    for t in range(g - 1):
        lhs = B[t] - B[t + 1]
        rhs = alpha * R[t] + B[t] / beta
        if lhs > rhs:
            return _fail("generalized-charging", t + 1, lhs, rhs, "welfare drop exceeds charge")
    if B[-1] > alpha * R[-1]:
        return _fail("generalized-charging", g, B[-1], alpha * R[-1], "final benchmark exceeds charge")
    best = max(R)
    bound = B[0] * (1 - Fraction(g - 1) / beta) / (g * alpha)
    if best < bound:
        return _fail("generalized-charging", R.index(best) + 1, bound, best, "max revenue below implied bound")
    ell = R.index(best) + 1
    return CheckReport("generalized-charging", True, ell, bound, best)


def check_bicriteria_claim3(trace, alpha, beta) -> CheckReport:
    """Surplus premise per round, then both conclusions at the first threshold index.

    The instance constant c is solved from the selected round's revenue.
    """
    seq = _as_sequence(trace)
    alpha, beta = Fraction(alpha), Fraction(beta)
    g, B, R, P, W = len(seq.revenue), seq.benchmark_welfare, seq.revenue, seq.surplus, seq.sold_welfare
    for t in range(g):
        lhs = B[t] * (1 - 1 / beta)
        rhs = alpha * R[t] + P[t]
        if lhs > rhs:
            return _fail("bicriteria-claim3", t + 1, lhs, rhs, "premise SW(B)(1-1/beta) <= alpha Rev + Surp fails")
    base = B[0] * (1 - Fraction(g - 1) / beta)
    unit = base / (2 * g * alpha)
    ell = next((t for t in range(g) if R[t] >= unit), None)
    if ell is None:
        return _fail("bicriteria-claim3", None, unit, max(R), "no round reaches the threshold")
    if unit <= 0:
        return CheckReport("bicriteria-claim3", True, ell + 1, unit, R[ell], "threshold is non-positive")
    c = R[ell] / unit
    sw_bound = base * ((1 - 1 / beta) / 2 - c / (2 * g) + c / (2 * g * alpha))
    if W[ell] < sw_bound:
        return _fail("bicriteria-claim3", ell + 1, sw_bound, W[ell], f"welfare conclusion fails (c={c})")
    rep = CheckReport("bicriteria-claim3", True, ell + 1, sw_bound, W[ell], f"c={c}")
    rep.extra["c"] = c
    return rep


def classify_bicriteria(trace, sw_a: Fraction | None = None) -> CheckReport:
    """Two-branch guarantee of the threshold-selected round (alpha = beta = 2 gamma).

    Branch 1: Rev >= SW(A)/(8 gamma^2) and SW(S) >= SW(A)/8.
    Branch 2: Rev >= (1/2 - 1/(2 gamma)) SW(A)/(8 gamma).
    """
    seq = _as_sequence(trace)
    g = seq.gamma
    sw_a = seq.benchmark_welfare[0] if sw_a is None else Fraction(sw_a)
    threshold = sw_a / (8 * g * g)
    ell = next((t for t, r in enumerate(seq.revenue) if r >= threshold), None)
    if ell is None:
        return _fail("bicriteria-dichotomy", None, threshold, max(seq.revenue), "unclassifiable: no round qualifies")
    rev, sw = seq.revenue[ell], seq.sold_welfare[ell]
    c = rev / threshold if threshold else Fraction(0)
    if c <= Fraction(g - 1, 2):
        ok = rev >= threshold and sw >= sw_a / 8
        rep = CheckReport("bicriteria-dichotomy", ok, ell + 1, sw_a / 8, sw, "branch 1")
        rep.extra["branch"] = 1
    else:
        bound = (Fraction(1, 2) - Fraction(1, 2 * g)) * sw_a / (8 * g)
        rep = CheckReport("bicriteria-dichotomy", rev >= bound, ell + 1, bound, rev, "branch 2")
        rep.extra["branch"] = 2
    rep.extra["c"] = c
    return rep


# Trace-level invariants ----------------------------------------------------------


def check_halving(trace) -> CheckReport:
    rounds = trace.rounds
    for t in range(len(rounds) - 1):
        a, b = theta(rounds[t].benchmark), theta(rounds[t + 1].benchmark)
        if a < 2 * b:
            return _fail("halving", t + 1, Fraction(2 * b), Fraction(a), "theta(B) fell by less than half")
    return CheckReport("halving", True)


def check_terminal_size(trace) -> CheckReport:
    last = theta(trace.rounds[-1].benchmark)
    return CheckReport("terminal-size", last <= 2, len(trace.rounds), Fraction(last), Fraction(2))


def _orders_for_round(r, orders):
    if orders is None:
        return [r.order] if r.order is not None else []
    return orders


def check_surplus_charge(trace, orders: Sequence[Sequence[int]] | None = None) -> CheckReport:
    """SW(B) - Surp <= 2 gamma Rev + SW(B)/(2 gamma) for every round and tried order."""
    inst, g = trace.instance, trace.gamma
    for t, r in enumerate(trace.rounds[:-1]):
        sw_b = social_welfare(inst, r.benchmark)
        for order in _orders_for_round(r, orders):
            S = r.sold if tuple(order) == r.order else sequential_run(inst, r.prices, r.caps, order)
            lhs = sw_b - surplus(inst, r.prices, S)
            rhs = 2 * g * revenue(r.prices, S) + sw_b / (2 * g)
            if lhs > rhs:
                return _fail("surplus-charge", t + 1, lhs, rhs, f"order {tuple(order)}")
    return CheckReport("surplus-charge", True)


def check_carryover_drop(trace) -> CheckReport:
    """SW(B) - SW(S) <= 2 gamma Rev + SW(B)/(2 gamma) on every non-tail round."""
    inst, g = trace.instance, trace.gamma
    for t, r in enumerate(trace.rounds[:-1]):
        sw_b = social_welfare(inst, r.benchmark)
        lhs = sw_b - social_welfare(inst, r.sold)
        rhs = 2 * g * revenue(r.prices, r.sold) + sw_b / (2 * g)
        if lhs > rhs:
            return _fail("carryover-drop", t + 1, lhs, rhs)
    return CheckReport("carryover-drop", True)


def check_unsold_handback(trace) -> CheckReport:
    """SW(B_t) - SW(B_{t+1}) <= 2 gamma Rev_t on alloc-unsold rounds."""
    inst, g, rounds = trace.instance, trace.gamma, trace.rounds
    for t in range(len(rounds) - 1):
        r = rounds[t]
        if r.branch != "alloc-unsold":
            continue
        lhs = social_welfare(inst, r.benchmark) - social_welfare(inst, rounds[t + 1].benchmark)
        rhs = 2 * g * revenue(r.prices, r.sold)
        if lhs > rhs:
            return _fail("unsold-handback", t + 1, lhs, rhs)
    return CheckReport("unsold-handback", True)


def check_tail(trace) -> CheckReport:
    inst, last = trace.instance, trace.rounds[-1]
    j, i = trace.tail_pair
    v_star = single_value(inst.buyers[j], i)
    rev = revenue(last.prices, last.sold)
    if rev != v_star - trace.epsilon:
        return _fail("tail", trace.gamma, rev, v_star - trace.epsilon, "tail revenue is not v* - eps")
    sw_b = social_welfare(inst, last.benchmark)
    if sw_b > 2 * v_star:
        return _fail("tail", trace.gamma, sw_b, 2 * v_star, "final benchmark welfare exceeds 2 v*")
    return CheckReport("tail", True, trace.gamma, sw_b, 2 * v_star)


def check_theorem5_universality(inst: Instance, prices, caps, orders, bound) -> CheckReport:
    """Every listed order earns at least ``bound``."""
    bound = Fraction(bound)
    for order in orders:
        rev = revenue(prices, sequential_run(inst, prices, caps, order))
        if rev < bound:
            rep = _fail("universality", None, bound, rev, f"order {tuple(order)}")
            rep.extra["order"] = list(order)
            return rep
    return CheckReport("universality", True, None, bound, None)


def check_revenue_bound(trace, sw_a: Fraction, factor) -> CheckReport:
    """SW(A) <= factor * Rev of the selected round."""
    t = trace.selected
    rev = trace.revenues[t]
    rhs = Fraction(factor) * rev
    return CheckReport("revenue-bound", sw_a <= rhs, t + 1, sw_a, rhs)


def verify_core_trace(trace, orders: Sequence[Sequence[int]] | None = None) -> list[CheckReport]:
    """Run the whole battery on a core trace."""
    g = trace.gamma
    reports = [
        check_halving(trace),
        check_terminal_size(trace),
        check_carryover_drop(trace),
        check_surplus_charge(trace, orders),
        check_unsold_handback(trace),
        check_tail(trace),
        check_generalized_charging(trace, 2 * g, 2 * g),
        check_bicriteria_claim3(trace, 2 * g, 2 * g),
        classify_bicriteria(trace),
    ]
    if trace.selected is not None:
        sw_a = social_welfare(trace.instance, trace.initial)
        reports.append(check_revenue_bound(trace, sw_a, 4 * g * g))
        if orders and trace.meta.get("arrival", "adversarial") == "adversarial":
            r = trace.rounds[trace.selected]
            reports.append(check_theorem5_universality(trace.instance, r.prices, r.caps, orders,
                                                       trace.revenues[trace.selected]))
    return reports


# Random arrival ------------------------------------------------------------------


def check_min_estimator(sampler, f: Callable, samples: int, trials: int, seed: int = 0,
                        order_cap: int | None = None) -> tuple[float, Fraction]:
    """Empirical frequency of {min of ``samples`` draws of f > 2 E[f]}.

    E[f] is exact over the sampler's support; trial ``r`` draws from
    ``default_rng([seed, r])``.
    """
    cache: dict = {}

    def f_cached(order):
        if order not in cache:
            cache[order] = Fraction(f(order))
        return cache[order]

    expectation = sum((w * f_cached(o) for o, w in sampler.support(order_cap)), Fraction(0))
    hits = 0
    for r in range(trials):
        rng = np.random.default_rng([seed, r])
        low = min(f_cached(sampler.draw(rng)) for _ in range(samples))
        if low > 2 * expectation:
            hits += 1
    return hits / trials if trials else 0.0, expectation
