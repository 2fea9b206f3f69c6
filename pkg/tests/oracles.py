"""Slow, independent reference implementations used to pin expected values.

Nothing here imports the package's algorithms; valuations are read through
their public fields and every optimisation is plain enumeration.
"""
from fractions import Fraction
from itertools import combinations, product

from itempricing.rational import UNAVAILABLE
from itempricing.valuations import Additive, MultiUnit, SingleMinded, UnitDemand, XoS


def val(v, T):
    T = frozenset(T)
    if not T:
        return Fraction(0)
    if isinstance(v, Additive):
        return sum(v.values[i] for i in T)
    if isinstance(v, UnitDemand):
        return max(v.values[i] for i in T)
    if isinstance(v, XoS):
        return max(sum(c[i] for i in T) for c in v.clauses)
    if isinstance(v, MultiUnit):
        return v.values[min(len(T), len(v.values) - 1)]
    if isinstance(v, SingleMinded):
        return v.value if v.demand_set <= T else Fraction(0)
    raise TypeError(v)


def clauses(v):
    if isinstance(v, XoS):
        return [list(c) for c in v.clauses]
    if isinstance(v, Additive):
        return [list(v.values)]
    m = len(v.values)
    return [[v.values[i] if g == i else 0 for g in range(m)] for i in range(m)]


def witness(v, T):
    cs = clauses(v)
    best = max(sum(c[i] for i in T) for c in cs)
    return next(c for c in cs if sum(c[i] for i in T) == best)


def ref_demand(v, prices, avail):
    """Max utility, then fewest goods, then lexicographically smallest."""
    best_T, best_u = frozenset(), Fraction(0)
    for size in range(1, len(avail) + 1):
        for combo in combinations(sorted(avail), size):
            u = val(v, combo) - sum(prices[i] for i in combo)
            if u > best_u:
                best_T, best_u = frozenset(combo), u
    return best_T


def ref_sequential(inst, prices, caps, order):
    left = [q if p is not UNAVAILABLE else 0 for p, q in zip(prices, caps)]
    out = [frozenset()] * inst.n_buyers
    for j in order:
        T = ref_demand(inst.buyers[j], prices, [i for i in range(inst.m) if left[i] > 0])
        for i in T:
            left[i] -= 1
        out[j] = T
    return out


def ref_revenue(prices, bundles):
    return sum((prices[i] for b in bundles for i in b), Fraction(0))


def ref_welfare(inst, bundles):
    return sum((val(v, b) for v, b in zip(inst.buyers, bundles)), Fraction(0))


def brute_welfare(inst):
    """Optimal welfare by an unpruned product over every buyer's bundle."""
    m = inst.m
    subsets = [frozenset(i for i in range(m) if (b >> i) & 1) for b in range(1 << m)]
    best = Fraction(0)
    for picks in product(subsets, repeat=inst.n_buyers):
        if all(sum(i in T for T in picks) <= k for i, k in enumerate(inst.supply)):
            best = max(best, ref_welfare(inst, picks))
    return best


def multiunit_opt(inst):
    best = Fraction(0)
    for qs in product(range(inst.m + 1), repeat=inst.n_buyers):
        if sum(qs) <= inst.m:
            best = max(best, sum(v.values[min(q, len(v.values) - 1)] for v, q in zip(inst.buyers, qs)))
    return best


def ref_core(inst, A, gamma, orders, eps_factor=Fraction(1, 2**20)):
    """Item halving as a list of (benchmark, prices, sold, branch) plus tail revenue."""
    m = inst.m
    B = list(A)
    rounds = []
    for _ in range(1, gamma):
        w = {j: witness(inst.buyers[j], B[j]) for j in range(inst.n_buyers) if B[j]}
        counts = [sum(i in b for b in B) for i in range(m)]
        prices = []
        for i in range(m):
            if counts[i] == 0:
                prices.append(UNAVAILABLE)
            else:
                u = sum(w[j][i] for j in w if i in B[j])
                prices.append(Fraction(u) / (2 * gamma * counts[i]))
        worst = None
        for order in orders:
            S = ref_sequential(inst, prices, counts, order)
            r = ref_revenue(prices, S)
            if worst is None or r < worst[0]:
                worst = (r, S)
        S = worst[1]
        tS, tB = sum(map(len, S)), sum(map(len, B))
        if 2 * tS <= tB:
            branch, nxt = "sold-carryover", S
        else:
            branch = "alloc-unsold"
            nxt = [set() for _ in B]
            for i in range(m):
                q = counts[i] - sum(i in s for s in S)
                hs = sorted((j for j in range(len(B)) if i in B[j]), key=lambda j: (-w[j][i], j))
                for j in hs[:q]:
                    nxt[j].add(i)
            nxt = [frozenset(x) for x in nxt]
        rounds.append((tuple(B), tuple(prices), tuple(S), branch))
        B = list(nxt)
    v_star = max(val(v, {i}) for v in inst.buyers for i in range(m))
    return rounds, tuple(B), v_star - v_star * eps_factor
