from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from itempricing.errors import (
    ChargingViolationError,
    DegenerateInstanceError,
    InconsistentSolutionError,
    PreconditionError,
    UnsupportedValuationError,
)
from itempricing.generators import GenSpec, generate
from itempricing.item_halving import (
    ALLOC_UNSOLD,
    CARRYOVER,
    TAIL,
    Adversarial,
    Fixed,
    RandomSampling,
    alloc_unsold,
    core_run,
    gamma_random,
    greedy_allocation,
    initial_allocation,
    prices_fn,
    sample_count,
    select_first_threshold,
    solve_xos,
    tail_epsilon,
    xos_gamma,
)
from itempricing.market import Allocation, Instance, revenue, social_welfare
from itempricing.mechanisms import UniformOrders, all_orders, sequential_run
from itempricing.rational import UNAVAILABLE
from itempricing.valuations import Additive, MultiUnit, XoS

from oracles import brute_welfare, ref_core


def test_gamma_formula():
    assert xos_gamma(Instance((1,), (XoS([[1]]),))) == 1
    assert xos_gamma(Instance((1, 1), (XoS([[1, 1]]),))) == 2
    assert xos_gamma(Instance((2, 1, 1), (XoS([[1, 1, 1]]),))) == 4  # m*ceil(k) = 6
    assert xos_gamma(Instance((2,) * 6, (XoS([[1] * 6]),))) == 5


def test_sample_count():
    assert sample_count(Instance((1,), (XoS([[1]]),))) == 1
    inst = Instance((1,) * 4, tuple(XoS([[1] * 4]) for _ in range(4)))
    assert sample_count(inst) == 5  # log2(2 * 4 * 4) = 5


def test_prices_fn():
    inst = Instance((2, 1, 1), (XoS([[4, 2, 0]]), XoS([[6, 0, 0], [0, 0, 9]])))
    B = Allocation.of([{0, 1}, {0}])
    p = prices_fn(inst, B, 2)
    assert p == (F(10, 8), F(2, 4), UNAVAILABLE)
    with pytest.raises(PreconditionError):
        prices_fn(inst, B, 0)


def test_alloc_unsold_returns_top_holders():
    inst = Instance((3,), (XoS([[2]]), XoS([[5]]), XoS([[3]])))
    B = Allocation.of([{0}, {0}, {0}])
    S = Allocation.of([(), {0}, ()])
    assert alloc_unsold(inst, B, S).bundles == (frozenset(), frozenset({0}), frozenset({0}))
    with pytest.raises(InconsistentSolutionError):
        alloc_unsold(inst, Allocation.of([(), {0}, ()]), B)


def test_two_by_two_trace(two_by_two):
    sol, tr = solve_xos(two_by_two)
    assert tr.gamma == 2
    # buyer 0 arrives first and takes both goods, so nothing is left over
    assert [r.branch for r in tr.rounds] == [ALLOC_UNSOLD, TAIL]
    assert tr.rounds[0].sold.bundles == (frozenset({0, 1}), frozenset())
    assert tr.rounds[1].benchmark == Allocation.empty(2)
    A = tr.initial
    assert A.bundles == (frozenset({0}), frozenset({1}))
    assert tr.rounds[0].prices == (F(1), F(3, 4))
    assert tr.revenues == [F(7, 4), F(4) - F(4, 2**20)]
    assert tr.selected == 1
    assert sol.prices[0] == 4 - F(4, 2**20) and sol.prices[1] is UNAVAILABLE
    assert sol.meta == {"round": 2, "branch": TAIL}


def test_equality_branch_takes_carryover():
    # theta(B) = 2 and exactly one item sells: 2 * theta(S) == theta(B)
    inst = Instance((1, 1), (XoS([[8, 0], [0, 1]]),))
    tr = core_run(inst, Allocation.of([{0, 1}]), 2, Fixed((0,)))
    r = tr.rounds[0]
    assert sum(map(len, r.sold.bundles)) * 2 == sum(map(len, r.benchmark.bundles))
    assert r.branch == CARRYOVER
    assert tr.rounds[1].benchmark == r.sold


def test_tail_only_trace():
    inst = Instance((1,), (XoS([[6]]), XoS([[9]])))
    sol, tr = solve_xos(inst)
    assert tr.gamma == 1 and len(tr.rounds) == 1 and tr.rounds[0].branch == TAIL
    assert tr.tail_pair == (1, 0)
    assert tr.revenues == [9 - F(9, 2**20)]


def test_epsilon_override_and_bounds():
    inst = Instance((1,), (XoS([[6]]),))
    _, tr = solve_xos(inst, epsilon="1/2")
    assert tr.revenues == [F(11, 2)]
    assert tail_epsilon(F(6), 0) == 0
    with pytest.raises(PreconditionError):
        tail_epsilon(F(6), 6)
    with pytest.raises(PreconditionError):
        tail_epsilon(F(6), -1)


def test_rejections():
    with pytest.raises(DegenerateInstanceError):
        solve_xos(Instance((1, 1), (XoS([[0, 0]]), XoS([[0, 0]]))))
    with pytest.raises(DegenerateInstanceError):
        core_run(Instance((1,), (XoS([[3]]),)), Allocation.empty(1), 1, Fixed((0,)))
    with pytest.raises(PreconditionError):
        core_run(Instance((1,), (XoS([[3]]),)), Allocation.of([{0}]), 0, Fixed((0,)))
    with pytest.raises(PreconditionError):
        core_run(Instance((1,), (XoS([[3]]), XoS([[3]]))), Allocation.of([{0}, {0}]), 1, Fixed((0, 1)))
    with pytest.raises(UnsupportedValuationError) as info:
        solve_xos(Instance((1, 1), (XoS([[1, 1]]), MultiUnit([0, 1, 2]))))
    assert info.value.buyer == 1
    with pytest.raises(PreconditionError):
        solve_xos(Instance((1,), (XoS([[1]]),)), selection="bogus")
    with pytest.raises(PreconditionError):
        Adversarial(())


def test_threshold_selection():
    inst = generate(GenSpec("xos", 4, 3, supply=(1, 2), seed=5))
    sol, tr = solve_xos(inst, selection="threshold")
    sw_a = social_welfare(inst, tr.initial)
    bound = sw_a / (8 * tr.gamma ** 2)
    assert tr.revenues[tr.selected] >= bound
    assert all(r < bound for r in tr.revenues[: tr.selected])
    with pytest.raises(ChargingViolationError):
        select_first_threshold(tr, 10**9)


def test_greedy_initial_is_feasible():
    inst = generate(GenSpec("xos", 5, 3, supply=(1, 2), seed=2))
    A = greedy_allocation(inst)
    assert initial_allocation(inst, "greedy") == A
    sol, tr = solve_xos(inst, initial="greedy")
    assert tr.initial == A
    with pytest.raises(PreconditionError):
        initial_allocation(inst, "nope")


def test_random_sampling_reproducible():
    inst = generate(GenSpec("xos", 4, 4, supply=(1, 2), seed=9))
    s = RandomSampling(UniformOrders(4), sample_count(inst), seed=3)
    a = solve_xos(inst, arrival=s)[1]
    b = solve_xos(inst, arrival=s)[1]
    assert [r.order for r in a.rounds] == [r.order for r in b.rounds]
    assert a.meta["arrival"] == "randomsampling"
    p = a.rounds[0].prices
    caps = a.rounds[0].caps
    assert gamma_random(inst, p, caps, UniformOrders(4), 3, 11) == gamma_random(inst, p, caps, UniformOrders(4), 3, 11)
    with pytest.raises(PreconditionError):
        RandomSampling(UniformOrders(2), 0)


def test_adversarial_solution_is_worst_order():
    inst = generate(GenSpec("xos", 4, 3, supply=(1, 2), seed=11))
    sol, tr = solve_xos(inst)
    for r in tr.rounds[:-1]:
        revs = [revenue(r.prices, sequential_run(inst, r.prices, r.caps, o)) for o in all_orders(3)]
        assert revenue(r.prices, r.sold) == min(revs)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 4), st.integers(1, 3))
def test_trace_matches_reference(seed, m, n):
    inst = generate(GenSpec("xos", m, n, supply=(1, 2), values=(0, 20), seed=seed))
    if all(x == 0 for v in inst.buyers for c in v.clauses for x in c):
        return
    sol, tr = solve_xos(inst)
    assert social_welfare(inst, tr.initial) == brute_welfare(inst)
    rounds, last_B, tail_rev = ref_core(inst, tr.initial.bundles, tr.gamma, all_orders(n))
    assert len(rounds) == len(tr.rounds) - 1
    for got, (B, p, S, branch) in zip(tr.rounds, rounds):
        assert got.benchmark.bundles == B
        assert got.prices == p
        assert revenue(p, got.sold) == revenue(p, Allocation.of(S))
        assert got.branch == branch
    assert tr.revenues[-1] == tail_rev


def test_additive_buyers_accepted():
    inst = Instance((1, 1), (Additive([3, 1]), Additive([1, 2])))
    sol, tr = solve_xos(inst)
    assert tr.revenues[tr.selected] > 0
