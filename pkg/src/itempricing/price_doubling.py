"""Reserve-price doubling: turn a welfare black box into a revenue algorithm.

Each step appends ``k_i + 1`` dummy buyers per good, each valuing only
that good at the current reserve ``r``, so the black box is forced to
price every good at ``r`` or more.  The reserve doubles every step.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .config import DEFAULT_LIMITS
from .errors import (
    ChargingViolationError,
    DegenerateInstanceError,
    InconsistentSolutionError,
    PreconditionError,
    UnsupportedValuationError,
)
from .market import Allocation, Instance, PricingSolution, good_counts, revenue, social_welfare
from .rational import Rational, as_fraction, ceil_fraction, ceil_log2, common_denominator
from .valuations import UnitDemand, value
from .verify import CheckReport, brute_optimal_welfare


def augment_with_dummies(inst: Instance, r: Rational) -> Instance:
    """Append k_i + 1 single-good buyers per good, each valuing it at ``r``."""
    r = as_fraction(r)
    if r < 0:
        raise PreconditionError("reserve must be non-negative")
    zero = Fraction(0)
    dummies = []
    for i, k in enumerate(inst.supply):
        vals = tuple(r if g == i else zero for g in range(inst.m))
        dummies.extend(UnitDemand(vals) for _ in range(k + 1))
    return Instance(inst.supply, inst.buyers + tuple(dummies))


def strip_dummies(prices, A: Allocation, n_buyers: int) -> tuple[tuple, Allocation]:
    return tuple(prices), Allocation(A.bundles[:n_buyers])


# Unit-demand Walrasian black box -----------------------------------------------------


def _require_unit_demand(inst: Instance) -> None:
    for j, v in enumerate(inst.buyers):
        if not isinstance(v, UnitDemand):
            raise UnsupportedValuationError(
                f"buyer {j} has a {type(v).__name__} valuation; this black box needs unit-demand buyers", buyer=j)


def least_envy_free_prices(inst: Instance, A: Allocation) -> tuple[Fraction, ...]:
    """Component-wise smallest prices supporting a unit-demand assignment.

    Longest paths from a virtual source: every price is at least 0, at least
    the value of any unassigned buyer, and high enough that no assigned
    buyer envies another good.  A positive cycle means ``A`` is not
    welfare-optimal.
    """
    m = inst.m
    edges = []  # (src, dst, w): p_dst >= p_src + w; src = -1 is the source at 0
    for j, (v, b) in enumerate(zip(inst.buyers, A.bundles)):
        if not b:
            edges.extend((-1, i, v.values[i]) for i in range(m))
            continue
        (a,) = tuple(b)
        edges.extend((a, i, v.values[i] - v.values[a]) for i in range(m) if i != a)
    p = [Fraction(0)] * m

    def relax() -> bool:
        changed = False
        for src, dst, w in edges:
            cand = w if src < 0 else p[src] + w
            if cand > p[dst]:
                p[dst] = cand
                changed = True
        return changed

    for _ in range(m + 1):
        if not relax():
            break
    else:
        raise InconsistentSolutionError("envy constraints contain a positive cycle; assignment is not optimal")
    for j, (v, b) in enumerate(zip(inst.buyers, A.bundles)):
        for a in b:
            if p[a] > v.values[a]:
                raise InconsistentSolutionError(f"buyer {j} would pay {p[a]} for a good worth {v.values[a]}")
    return tuple(p)


def _assignment_hungarian(inst: Instance) -> Allocation:
    slots = [i for i, k in enumerate(inst.supply) for _ in range(k)]
    vals = [[v.values[i] for i in slots] for v in inst.buyers]
    scale = common_denominator(x for row in vals for x in row)
    weights = np.array([[int(x * scale) for x in row] for row in vals], dtype=np.int64)
    rows, cols = linear_sum_assignment(weights, maximize=True)
    bundles: list[frozenset] = [frozenset()] * inst.n_buyers
    for j, c in zip(rows, cols):
        if weights[j, c] > 0:
            bundles[int(j)] = frozenset((slots[int(c)],))
    return Allocation(tuple(bundles))


def unit_demand_walrasian(inst: Instance) -> tuple[tuple, Allocation]:
    """Welfare-optimal many-to-one assignment plus least supporting prices."""
    _require_unit_demand(inst)
    A = _assignment_hungarian(inst)
    return least_envy_free_prices(inst, A), A


def brute_walrasian(inst: Instance) -> tuple[tuple, Allocation]:
    """Same contract as :func:`unit_demand_walrasian`, assignment by exhaustive DP."""
    _require_unit_demand(inst)
    limits = DEFAULT_LIMITS.with_overrides(brute_buyers=max(inst.n_buyers, DEFAULT_LIMITS.brute_buyers))
    A, _ = brute_optimal_welfare(inst, limits)
    return least_envy_free_prices(inst, A), A


@dataclass(frozen=True)
class WelfareBlackBox:
    name: str
    run: Callable[[Instance], tuple[tuple, Allocation]]
    alpha: Fraction = Fraction(1)

    def __call__(self, inst: Instance):
        return self.run(inst)


BLACK_BOXES = {
    "unit_demand_walrasian": WelfareBlackBox("unit_demand_walrasian", unit_demand_walrasian),
    "brute_walrasian": WelfareBlackBox("brute_walrasian", brute_walrasian),
}


def check_locally_welfare_maximizing(inst: Instance, A: Allocation) -> CheckReport:
    """Empty-handed buyers value every set of not-sold-out goods at zero."""
    counts = good_counts(A, inst.m)
    open_goods = [i for i in range(inst.m) if counts[i] < inst.supply[i]]
    for j, (v, b) in enumerate(zip(inst.buyers, A.bundles)):
        if b:
            continue
        # Monotone valuations: checking the full open set covers every subset.
        x = value(v, frozenset(open_goods))
        if x > 0:
            return CheckReport("locally-welfare-maximizing", False, None, x, Fraction(0), f"buyer {j}")
    return CheckReport("locally-welfare-maximizing", True)


# The reduction -----------------------------------------------------------------------


@dataclass(frozen=True)
class ReductionStep:
    reserve: Fraction
    prices: tuple
    allocation: Allocation  # original buyers only
    augmented_counts: tuple[int, ...]


@dataclass
class ReductionTrace:
    instance: Instance
    black_box: str
    alpha: Fraction
    sw0: Fraction
    gamma: int
    steps: list[ReductionStep]
    selected: int | None = None  # 0-based
    base_prices: tuple = ()
    base_allocation: Allocation | None = None
    meta: dict = field(default_factory=dict)

    def welfare(self, t: int) -> Fraction:
        return social_welfare(self.instance, self.steps[t].allocation)

    def revenue(self, t: int) -> Fraction:
        s = self.steps[t]
        return revenue(s.prices, s.allocation)

    def pairs(self) -> list[tuple[Fraction, Fraction]]:
        return [(self.welfare(t), self.revenue(t)) for t in range(len(self.steps))]


def doubling_gamma(inst: Instance, alpha: Rational = 1) -> int:
    return 1 + ceil_log2(as_fraction(alpha) * inst.m * ceil_fraction(inst.k))


def price_doubling_run(inst: Instance, bb: WelfareBlackBox | str = "unit_demand_walrasian",
                       gamma: int | None = None) -> tuple[PricingSolution, ReductionTrace]:
    if isinstance(bb, str):
        if bb not in BLACK_BOXES:
            raise PreconditionError(f"unknown black box {bb!r}; choose from {sorted(BLACK_BOXES)}")
        bb = BLACK_BOXES[bb]
    p0, S0 = bb(inst)
    sw0 = social_welfare(inst, S0)
    if sw0 == 0:
        raise DegenerateInstanceError("black box returns zero welfare (all-zero market)")
    g = doubling_gamma(inst, bb.alpha) if gamma is None else int(gamma)
    base = sw0 / (2 * sum(inst.supply))
    steps = []
    for t in range(1, g + 1):
        r = base * 2 ** (t - 1)
        aug = augment_with_dummies(inst, r)
        p, A_full = bb(aug)
        prices, A = strip_dummies(p, A_full, inst.n_buyers)
        steps.append(ReductionStep(r, prices, A, tuple(good_counts(A_full, inst.m))))
    trace = ReductionTrace(inst, bb.name, bb.alpha, sw0, g, steps, None, tuple(p0), S0)
    target = trace.welfare(0) / (6 * g)
    for t in range(g):
        if trace.revenue(t) >= target:
            trace.selected = t
            break
    else:
        raise ChargingViolationError(f"no step reaches revenue SW(S1)/(6 gamma) = {target}")
    s = steps[trace.selected]
    return PricingSolution(s.prices, inst.supply, s.allocation, {"step": trace.selected + 1}), trace


# Checkers ------------------------------------------------------------------------------


def check_simple_charging(solutions: Sequence[tuple[Rational, Rational]], alpha: Rational) -> CheckReport:
    """Simple charging over (welfare, revenue) pairs, then the c = 3/2 trade-off."""
    if not solutions:
        raise PreconditionError("need at least one solution")
    alpha = as_fraction(alpha)
    sw = [as_fraction(w) for w, _ in solutions]
    rv = [as_fraction(r) for _, r in solutions]
    g = len(sw)
    for t in range(g - 1):
        if sw[t] - sw[t + 1] > alpha * rv[t]:
            return CheckReport("simple-charging", False, t + 1, sw[t] - sw[t + 1], alpha * rv[t])
    if sw[-1] > alpha * rv[-1]:
        return CheckReport("simple-charging", False, g, sw[-1], alpha * rv[-1])
    rev_target = sw[0] / (3 * g * alpha)
    for t in range(g):
        if rv[t] >= rev_target:
            ok = 3 * sw[t] >= 2 * sw[0]
            return CheckReport("simple-charging", ok, t + 1, 2 * sw[0] / 3, sw[t],
                               "" if ok else "welfare trade-off fails at the first revenue index")
    return CheckReport("simple-charging", False, None, rev_target, max(rv), "no index reaches the revenue target")


def check_reduction(trace: ReductionTrace, opt_welfare: Fraction | None = None) -> list[CheckReport]:
    """Per-step price facts, the charging chain and the end-to-end guarantee."""
    inst, g = trace.instance, trace.gamma
    reports = []
    low = sat = dbl = None
    for t, s in enumerate(trace.steps):
        stripped = good_counts(s.allocation, inst.m)
        for i in range(inst.m):
            if low is None and s.prices[i] < s.reserve:
                low = CheckReport("price-above-reserve", False, t + 1, s.prices[i], s.reserve, f"good {i}")
            if sat is None and s.prices[i] > s.reserve and (
                    stripped[i] != inst.supply[i] or s.augmented_counts[i] != inst.supply[i]):
                sat = CheckReport("saturated-sold-out", False, t + 1, Fraction(stripped[i]),
                                  Fraction(inst.supply[i]), f"good {i}")
            if dbl is None and t > 0 and s.prices[i] <= s.reserve:
                prev = trace.steps[t - 1].prices[i]
                if s.prices[i] > 2 * prev:
                    dbl = CheckReport("unsaturated-doubling", False, t + 1, s.prices[i], 2 * prev, f"good {i}")
    reports.append(low or CheckReport("price-above-reserve", True))
    reports.append(sat or CheckReport("saturated-sold-out", True))
    reports.append(dbl or CheckReport("unsaturated-doubling", True))
    reports.append(check_simple_charging(trace.pairs(), 2))
    sw1 = trace.welfare(0)
    if opt_welfare is not None:
        rhs = 2 * trace.alpha * sw1
        reports.append(CheckReport("first-step-welfare", opt_welfare <= rhs, 1, opt_welfare, rhs))
    if trace.selected is not None:
        t = trace.selected
        rev, sw = trace.revenue(t), trace.welfare(t)
        ok = 6 * g * rev >= sw1 and 3 * sw >= 2 * sw1
        reports.append(CheckReport("reduction-guarantee", ok, t + 1, sw1, 6 * g * rev))
    return reports
