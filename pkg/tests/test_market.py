from fractions import Fraction as F

import pytest

from itempricing.errors import InconsistentSolutionError, InvalidInstanceError, PreconditionError
from itempricing.market import (
    Allocation,
    Instance,
    PricingSolution,
    feasible,
    good_counts,
    holders,
    per_good_utilities,
    per_good_utility,
    revenue,
    social_welfare,
    solution_is_mechanism_valid,
    surplus,
    theta,
    top_buyers,
)
from itempricing.rational import UNAVAILABLE
from itempricing.valuations import Additive, MultiUnit, SingleMinded, UnitDemand, XoS


def test_instance_validation():
    with pytest.raises(InvalidInstanceError):
        Instance((), (Additive([]),))
    with pytest.raises(InvalidInstanceError):
        Instance((1,), ())
    with pytest.raises(InvalidInstanceError):
        Instance((0,), (Additive([1]),))
    with pytest.raises(InvalidInstanceError):
        Instance((1, 1), (Additive([1]),))
    with pytest.raises(InvalidInstanceError):
        Instance((1, 1), (MultiUnit([0, 1]),))
    with pytest.raises(InvalidInstanceError):
        Instance((1,), (SingleMinded({3}, 1),))


def test_instance_stats():
    inst = Instance((1, 2, 2), (Additive([1, 1, 1]),))
    assert inst.m == 3 and inst.n_buyers == 1 and inst.k == F(5, 3) and inst.k_max == 2


def test_allocation_statistics():
    inst = Instance((2, 1), (XoS([[3, 1], [0, 5]]), XoS([[2, 2]]), XoS([[4, 0]])))
    A = Allocation.of([{0, 1}, {0}, ()])
    assert good_counts(A, 2) == [2, 1]
    assert holders(A, 0) == [0, 1]
    assert theta(A) == 3
    assert feasible(A, inst)
    assert not feasible(Allocation.of([{0}, {0}, {0}]), inst)
    assert not feasible(Allocation.of([{0}]), inst)
    assert not feasible(Allocation.of([{5}, (), ()]), inst)
    assert social_welfare(inst, A) == 5 + 2
    # buyer 0 uses clause 1 (value 5 beats 4), so good 0 contributes 0 from them
    assert per_good_utility(inst, A, 0) == 0 + 2
    assert per_good_utilities(inst, A) == [F(2), F(5)]


def test_sum_of_per_good_utilities_is_welfare():
    inst = Instance((2, 2, 1), (XoS([[1, 2, 3], [3, 3, 0]]), UnitDemand([4, 1, 2]), Additive([1, 1, 1])))
    A = Allocation.of([{0, 1}, {0, 2}, {1}])
    assert sum(per_good_utilities(inst, A)) == social_welfare(inst, A)


def test_top_buyers_ties_to_smaller_index():
    inst = Instance((3,), (XoS([[2]]), XoS([[5]]), XoS([[2]])))
    A = Allocation.of([{0}, {0}, {0}])
    assert top_buyers(inst, A, 0, 2) == [0, 1]
    assert top_buyers(inst, A, 0, 0) == []
    with pytest.raises(PreconditionError):
        top_buyers(inst, A, 0, 4)


def test_revenue_and_surplus():
    inst = Instance((1, 1), (Additive([5, 1]), Additive([1, 1])))
    A = Allocation.of([{0}, ()])
    p = (F(3), UNAVAILABLE)
    assert revenue(p, A) == 3
    assert surplus(inst, p, A) == 2
    assert social_welfare(inst, A) == revenue(p, A) + surplus(inst, p, A)
    with pytest.raises(InconsistentSolutionError):
        revenue(p, Allocation.of([{1}, ()]))


def test_solution_validity():
    inst = Instance((2, 1), (Additive([1, 1]), Additive([1, 1])))
    ok = PricingSolution((1, 1), (1, 1), Allocation.of([{0}, {1}]))
    assert solution_is_mechanism_valid(ok, inst)
    assert not solution_is_mechanism_valid(PricingSolution((1, 1), (3, 1), Allocation.empty(2)), inst)
    assert not solution_is_mechanism_valid(PricingSolution((1, 1), (1, 1), Allocation.of([{0}, {0}])), inst)
    assert PricingSolution(("1/2", UNAVAILABLE), (1, 1), Allocation.empty(2)).prices == (F(1, 2), UNAVAILABLE)
