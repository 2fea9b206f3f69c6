from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from itempricing.errors import DegenerateInstanceError, InconsistentSolutionError, PreconditionError, UnsupportedValuationError
from itempricing.generators import GenSpec, generate
from itempricing.market import Allocation, Instance, social_welfare
from itempricing.mechanisms import simultaneous_check
from itempricing.price_doubling import (
    augment_with_dummies,
    brute_walrasian,
    check_locally_welfare_maximizing,
    check_reduction,
    check_simple_charging,
    doubling_gamma,
    least_envy_free_prices,
    price_doubling_run,
    unit_demand_walrasian,
)
from itempricing.valuations import UnitDemand, XoS

from oracles import brute_welfare


def ud(*rows, supply=None):
    m = len(rows[0])
    return Instance(tuple(supply or (1,) * m), tuple(UnitDemand(r) for r in rows))


def test_least_prices_are_second_price():
    inst = ud([5], [3])
    p, A = unit_demand_walrasian(inst)
    assert A.bundles == (frozenset({0}), frozenset())
    assert p == (F(3),)
    inst = ud([5], [4], [3], supply=(2,))
    p, A = unit_demand_walrasian(inst)
    assert p == (F(3),)


def test_least_prices_two_goods():
    inst = ud([6, 4], [5, 1])
    p, A = unit_demand_walrasian(inst)
    assert A.bundles == (frozenset({1}), frozenset({0}))
    # dual of the assignment LP: p0 - p1 >= 2 (buyer 0 must not envy good 0), p0 <= 5
    assert p == (F(2), F(0))
    assert simultaneous_check(inst, p, A)


def test_least_prices_reject_suboptimal_assignment():
    inst = ud([5], [3])
    with pytest.raises(InconsistentSolutionError):
        least_envy_free_prices(inst, Allocation.of([(), {0}]))


def test_black_box_requires_unit_demand():
    with pytest.raises(UnsupportedValuationError):
        unit_demand_walrasian(Instance((1,), (XoS([[1]]),)))


def test_dummies():
    inst = ud([5, 1], supply=(2, 1))
    aug = augment_with_dummies(inst, 3)
    assert aug.n_buyers == 1 + 3 + 2
    assert aug.buyers[1].values == (3, 0) and aug.buyers[-1].values == (0, 3)
    with pytest.raises(PreconditionError):
        augment_with_dummies(inst, -1)


def test_locally_welfare_maximizing():
    inst = ud([5, 0], [3, 0])
    assert check_locally_welfare_maximizing(inst, Allocation.of([{0}, ()]))
    assert not check_locally_welfare_maximizing(inst, Allocation.of([(), ()]))


def test_simple_charging():
    assert check_simple_charging([(10, 5), (8, 4)], 2)
    assert not check_simple_charging([(10, 1), (2, 1)], 2)
    assert not check_simple_charging([(10, 1)], 2)
    with pytest.raises(PreconditionError):
        check_simple_charging([], 2)


def test_gamma():
    assert doubling_gamma(ud([1, 1, 1], supply=(2, 1, 1))) == 1 + 3


def test_small_run():
    inst = ud([8, 2], [6, 0], [0, 4])
    sol, tr = price_doubling_run(inst)
    assert tr.sw0 == 12
    assert tr.gamma == 1 + 1
    assert [s.reserve for s in tr.steps] == [F(3), F(6)]
    assert all(r for r in check_reduction(tr, brute_welfare(inst)))
    assert sol.caps == inst.supply
    assert sol.meta == {"step": tr.selected + 1}


def test_black_boxes_agree_on_welfare():
    for seed in range(15):
        inst = generate(GenSpec("unit_demand", 3, 3, supply=(1, 2), seed=seed))
        pa, A = unit_demand_walrasian(inst)
        pb, B = brute_walrasian(inst)
        assert social_welfare(inst, A) == social_welfare(inst, B) == brute_welfare(inst)
        assert simultaneous_check(inst, pa, A) and simultaneous_check(inst, pb, B)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 4), st.integers(1, 4))
def test_least_prices_are_least(seed, m, n):
    inst = generate(GenSpec("unit_demand", m, n, supply=(1, 2), values=(0, 12), seed=seed))
    p, A = unit_demand_walrasian(inst)
    assert simultaneous_check(inst, p, A)
    for i in range(m):
        if p[i] == 0:
            continue
        lower = tuple(max(x - F(1, 2), F(0)) if g == i else x for g, x in enumerate(p))
        # every positive price sits on a tight envy constraint
        assert not simultaneous_check(inst, lower, A)


def test_all_zero_market_rejected():
    with pytest.raises(DegenerateInstanceError):
        price_doubling_run(ud([0, 0], [0, 0]))
    with pytest.raises(PreconditionError):
        price_doubling_run(ud([1]), bb="nope")
