"""Single-price mechanism for multi-unit markets.

The market has ``m`` identical goods (one copy of each good id) and every
buyer values only the number of units received.  If demand at the
starting price p' = SW(A)/(2 gamma theta(A)) overshoots the supply, the
solver posts the smallest indifference price at which demand fits and
allocates locally maximally.  Otherwise it runs a uniform-price halving
loop on the benchmark quantities.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .config import DEFAULT_LIMITS, Limits
from .errors import (
    DegenerateInstanceError,
    InconsistentSolutionError,
    NoOverwhelmingViolationError,
    PreconditionError,
    UnsupportedValuationError,
)
from .market import Allocation, Instance, feasible
from .rational import Rational, as_fraction, ceil_log2
from .valuations import MultiUnit, demand_quantity
from .verify import CheckReport, brute_optimal_welfare

THRESHOLD = "threshold"
HALVING = "halving"
HALVING_TAIL = "halving-tail"


def _require_multiunit(inst: Instance) -> None:
    for j, v in enumerate(inst.buyers):
        if not isinstance(v, MultiUnit):
            raise UnsupportedValuationError(
                f"buyer {j} has a {type(v).__name__} valuation; the multi-unit solver needs multi-unit buyers",
                buyer=j)
    if any(k != 1 for k in inst.supply):
        raise PreconditionError("multi-unit markets model identical units as m goods with one copy each")


def check_no_overwhelming(inst: Instance) -> bool:
    """No buyer gains from units beyond half the supply (rounded down)."""
    _require_multiunit(inst)
    half = inst.m // 2
    return all(v.at(q) == v.at(half) for v in inst.buyers for q in range(half, inst.m + 1))


def _utility(v: MultiUnit, p: Fraction, q: int) -> Fraction:
    return v.at(q) - p * q


def demands(inst: Instance, p: Rational, tie_mode: str = "smallest") -> tuple[int, ...]:
    return tuple(demand_quantity(v, p, inst.m, tie_mode) for v in inst.buyers)


def total_demand(inst: Instance, p: Rational, tie_mode: str = "smallest") -> int:
    """Sum of independent uniform-price demands; may exceed the supply."""
    if as_fraction(p) < 0:
        raise PreconditionError("price must be non-negative")
    return sum(demands(inst, p, tie_mode))


def candidate_prices(inst: Instance) -> list[Fraction]:
    """Every price at which some buyer is indifferent between two quantities, plus 0."""
    out = {Fraction(0)}
    for v in inst.buyers:
        for q1 in range(1, inst.m + 1):
            for q2 in range(q1):
                out.add((v.at(q1) - v.at(q2)) / (q1 - q2))
    return sorted(out)


def threshold_price(inst: Instance) -> Fraction:
    """Smallest candidate price whose smallest-tie demand fits in the supply."""
    _require_multiunit(inst)
    if all(v.at(q) == 0 for v in inst.buyers for q in range(inst.m + 1)):
        raise DegenerateInstanceError("all-zero market has no threshold price")
    for p in candidate_prices(inst):
        if total_demand(inst, p) <= inst.m:
            return p
    raise InconsistentSolutionError("no candidate price clears the market")  # unreachable


def locally_maximal_alloc(inst: Instance, p: Rational) -> tuple[int, ...]:
    """Smallest-tie demands, then grow indifferent buyers while the supply allows."""
    p = as_fraction(p)
    q = list(demands(inst, p))
    if sum(q) > inst.m:
        raise PreconditionError("smallest-tie demand already exceeds the supply")
    changed = True
    while changed:
        changed = False
        for j, v in enumerate(inst.buyers):
            u = _utility(v, p, q[j])
            slack = inst.m - sum(q)
            bigger = [x for x in range(q[j] + 1, q[j] + slack + 1) if _utility(v, p, x) == u]
            if bigger:
                q[j] = bigger[-1]
                changed = True
    return tuple(q)


def alloc_unsold_quantities(B: Sequence[int], S: Sequence[int]) -> tuple[int, ...]:
    """Quantity form of the unsold hand-back: max(|B_j| - |S_j|, 0) units each."""
    return tuple(max(b - s, 0) for b, s in zip(B, S))


def quantities_to_allocation(q: Sequence[int]) -> Allocation:
    bundles, nxt = [], 0
    for x in q:
        bundles.append(range(nxt, nxt + x))
        nxt += x
    return Allocation.of(bundles)


def _welfare(inst: Instance, q: Sequence[int]) -> Fraction:
    return sum((v.at(x) for v, x in zip(inst.buyers, q)), Fraction(0))


def multiunit_gamma(m: int) -> int:
    return max(1, ceil_log2(m))


@dataclass(frozen=True)
class HalvingStep:
    benchmark: tuple[int, ...]
    price: Fraction
    demand: tuple[int, ...]


@dataclass
class MultiUnitSolution:
    price: Fraction
    quantities: tuple[int, ...]
    case: str
    gamma: int = 1
    p_prime: Fraction = Fraction(0)
    initial: tuple[int, ...] = ()
    steps: list[HalvingStep] = field(default_factory=list)
    selected: int | None = None  # 0-based step index for the halving case
    epsilon: Fraction | None = None

    @property
    def revenue(self) -> Fraction:
        return self.price * sum(self.quantities)

    def allocation(self) -> Allocation:
        return quantities_to_allocation(self.quantities)


def solve_multiunit(inst: Instance, A: Allocation | None = None, gamma: int | None = None,
                    epsilon: Rational | None = None, limits: Limits = DEFAULT_LIMITS) -> MultiUnitSolution:
    _require_multiunit(inst)
    m = inst.m
    if m < 2:
        raise PreconditionError("the multi-unit mechanism needs at least two units")
    if not check_no_overwhelming(inst):
        bad = next(j for j, v in enumerate(inst.buyers) if any(v.at(q) != v.at(m // 2) for q in range(m // 2, m + 1)))
        raise NoOverwhelmingViolationError(f"buyer {bad} values more than {m // 2} units")
    if A is None:
        A = brute_optimal_welfare(inst, limits)[0]
    if not feasible(A, inst):
        raise PreconditionError("initial allocation is not feasible")
    a_q = tuple(len(b) for b in A.bundles)
    if sum(a_q) < 1:
        raise DegenerateInstanceError("initial allocation assigns no units")
    if max(a_q) > m // 2:
        raise PreconditionError(f"initial allocation gives a buyer more than {m // 2} units")
    g = multiunit_gamma(m) if gamma is None else int(gamma)
    sw_a = _welfare(inst, a_q)
    p_prime = sw_a / (2 * g * sum(a_q))
    if total_demand(inst, p_prime) > m:
        p0 = threshold_price(inst)
        return MultiUnitSolution(p0, locally_maximal_alloc(inst, p0), THRESHOLD, g, p_prime, a_q)
    steps: list[HalvingStep] = []
    B = a_q
    for t in range(1, g):
        if sum(B) == 0:
            raise InconsistentSolutionError("halving benchmark emptied before the stopping rule fired")
        p = _welfare(inst, B) / (2 * g * sum(B))
        S = demands(inst, p)
        steps.append(HalvingStep(B, p, S))
        if sum(B) <= 2 * sum(S):
            if sum(S) > m:
                raise InconsistentSolutionError(f"halving stop at step {t} over-allocates ({sum(S)} > {m})")
            return MultiUnitSolution(p, S, HALVING, g, p_prime, a_q, steps, t - 1)
        B = S
    w_star = max(v.at(1) for v in inst.buyers)
    if epsilon is None:
        eps = w_star * limits.epsilon_factor
    else:
        eps = as_fraction(epsilon)
        if eps < 0 or (w_star > 0 and eps >= w_star):
            raise PreconditionError(f"epsilon {eps} must lie in [0, {w_star})")
    price = w_star - eps
    q = demands(inst, price)
    if sum(q) > m:
        raise InconsistentSolutionError(f"tail price {price} over-allocates ({sum(q)} > {m})")
    return MultiUnitSolution(price, q, HALVING_TAIL, g, p_prime, a_q, steps, None, eps)


# Checks --------------------------------------------------------------------------------


def check_uniform_envy_free(inst: Instance, sol: MultiUnitSolution) -> CheckReport:
    if sum(sol.quantities) > inst.m:
        return CheckReport("multiunit-feasible", False, None, Fraction(sum(sol.quantities)), Fraction(inst.m))
    for j, (v, x) in enumerate(zip(inst.buyers, sol.quantities)):
        mine = _utility(v, sol.price, x)
        best = max(_utility(v, sol.price, q) for q in range(inst.m + 1))
        if best > mine:
            return CheckReport("multiunit-envy-free", False, None, best, mine, f"buyer {j}")
    return CheckReport("multiunit-envy-free", True)


def check_indifference(inst: Instance, sol: MultiUnitSolution) -> CheckReport:
    """Buyers whose smallest-tie demand drops at the threshold are indifferent there."""
    p0 = sol.price
    below = [c for c in candidate_prices(inst) if c < p0]
    if not below:
        return CheckReport("indifference", True, detail="threshold is the lowest candidate")
    probe = (p0 + below[-1]) / 2
    for j, v in enumerate(inst.buyers):
        q_low = demand_quantity(v, probe, inst.m, "smallest")
        q_at = demand_quantity(v, p0, inst.m, "smallest")
        if q_at < q_low and _utility(v, p0, q_at) != _utility(v, p0, q_low):
            return CheckReport("indifference", False, None, _utility(v, p0, q_at), _utility(v, p0, q_low),
                               f"buyer {j}")
    return CheckReport("indifference", True)


def check_multiunit(inst: Instance, sol: MultiUnitSolution) -> list[CheckReport]:
    """Envy-freeness, feasibility, the case revenue bound and the halving-trace facts."""
    reports = [check_uniform_envy_free(inst, sol)]
    g = sol.gamma
    sw_a = _welfare(inst, sol.initial)
    if sol.case == THRESHOLD:
        rhs = sw_a / (4 * g)
        reports.append(CheckReport("multiunit-revenue", sol.revenue >= rhs, None, sol.revenue, rhs, "case I"))
        reports.append(check_indifference(inst, sol))
        return reports
    rhs = sw_a / (8 * g)
    reports.append(CheckReport("multiunit-revenue", sol.revenue >= rhs, None, sol.revenue, rhs, "case II"))
    steps = sol.steps
    for t in range(len(steps) - 1):
        if t + 2 < g and steps[t + 1].price < steps[t].price:
            reports.append(CheckReport("multiunit-price-monotone", False, t + 1, steps[t + 1].price, steps[t].price))
            break
    else:
        reports.append(CheckReport("multiunit-price-monotone", True))
    drop = None
    for t, st in enumerate(steps):
        sw_b, sw_next = _welfare(inst, st.benchmark), _welfare(inst, st.demand)
        if sw_b - sw_next > sw_b / (2 * g):
            drop = CheckReport("multiunit-step-drop", False, t + 1, sw_b - sw_next, sw_b / (2 * g))
            break
    reports.append(drop or CheckReport("multiunit-step-drop", True))
    if sol.case == HALVING:
        sw_l = _welfare(inst, steps[sol.selected].benchmark)
        reports.append(CheckReport("multiunit-retention", 2 * sw_l >= sw_a, sol.selected + 1, sw_l, sw_a / 2))
    return reports
