"""Integer hot loops behind the exact oracles.

Every kernel works on int64 arrays that the callers obtain by scaling
rationals to a common denominator, so results are exact.  Two
implementations exist for each kernel: a numba ``@njit`` loop and a
vectorised numpy path.  The numba path is used when numba imports and
``ITEMPRICING_DISABLE_NUMBA`` is unset; both are always importable under
``*_numba`` / ``*_numpy`` names so they can be cross-checked.
"""
from __future__ import annotations

import os
from functools import lru_cache

import numpy as np

INT_LIMIT = 2**62

try:  # pragma: no cover - exercised implicitly by whichever path is live
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


def _flag_disabled() -> bool:
    return os.environ.get("ITEMPRICING_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}


USE_NUMBA = HAVE_NUMBA and not _flag_disabled()

# Demand kernel --------------------------------------------------------------


@lru_cache(maxsize=32)
def _bit_table(n: int):
    masks = np.arange(1 << n, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(np.int64)
    popcount = bits.sum(axis=1)
    # Bit-reversed masks: maximal reversed mask == lexicographically smallest set.
    reversed_masks = (bits << (n - 1 - np.arange(n, dtype=np.int64))).sum(axis=1)
    for arr in (bits, popcount, reversed_masks):
        arr.setflags(write=False)
    return bits, popcount, reversed_masks


def xos_best_subset_numpy(clauses: np.ndarray, prices: np.ndarray) -> int:
    n = prices.shape[0]
    if n == 0:
        return 0
    bits, popcount, reversed_masks = _bit_table(n)
    values = (bits @ clauses.T).max(axis=1)
    utility = values - bits @ prices
    cand = np.flatnonzero(utility == utility.max())
    pc = popcount[cand]
    cand = cand[pc == pc.min()]
    return int(cand[np.argmax(reversed_masks[cand])])


@njit(cache=True, nogil=True)
def xos_best_subset_numba(clauses, prices):
    n_clauses, n = clauses.shape
    best_mask = 0
    best_util = 0
    best_pc = 0
    for mask in range(1, 1 << n):
        cost = 0
        pc = 0
        for i in range(n):
            if (mask >> i) & 1:
                cost += prices[i]
                pc += 1
        value = 0
        for l in range(n_clauses):
            s = 0
            for i in range(n):
                if (mask >> i) & 1:
                    s += clauses[l, i]
            if s > value:
                value = s
        util = value - cost
        better = False
        if util > best_util:
            better = True
        elif util == best_util:
            if pc < best_pc:
                better = True
            elif pc == best_pc:
                diff = mask ^ best_mask
                if (diff & -diff) & mask:
                    better = True
        if better:
            best_mask = mask
            best_util = util
            best_pc = pc
    return best_mask


def xos_best_subset(clauses: np.ndarray, prices: np.ndarray) -> int:
    """Bitmask of the utility-maximising subset of ``n`` goods.

    ``clauses`` is (L, n), ``prices`` is (n,), both int64 on one scale.
    Ties go to the smallest cardinality, then the lexicographically
    smallest index set.
    """
    if USE_NUMBA:
        return int(xos_best_subset_numba(clauses, prices))
    return xos_best_subset_numpy(clauses, prices)


# Welfare DP -----------------------------------------------------------------


def _state_layout(supply):
    supply = np.asarray(supply, dtype=np.int64)
    m = supply.shape[0]
    strides = np.ones(m, dtype=np.int64)
    for i in range(1, m):
        strides[i] = strides[i - 1] * (supply[i - 1] + 1)
    n_states = int(strides[-1] * (supply[-1] + 1)) if m else 1
    return supply, strides, n_states


def welfare_dp_numpy(bundle_values: np.ndarray, supply: np.ndarray) -> np.ndarray:
    n_buyers, n_bundles = bundle_values.shape
    supply, strides, n_states = _state_layout(supply)
    m = supply.shape[0]
    bits, _, _ = _bit_table(m)
    states = np.arange(n_states, dtype=np.int64)
    digits = (states[:, None] // strides[None, :]) % (supply[None, :] + 1)
    fits = np.all(digits[:, None, :] + bits[None, :, :] <= supply[None, None, :], axis=2)
    offsets = bits @ strides
    target = np.where(fits, states[:, None] + offsets[None, :], 0)
    neg = np.iinfo(np.int64).min // 4
    future = np.zeros(n_states, dtype=np.int64)
    choice = np.zeros((n_buyers, n_states), dtype=np.int64)
    for j in range(n_buyers - 1, -1, -1):
        total = np.where(fits, bundle_values[j][None, :] + future[target], neg)
        choice[j] = np.argmax(total, axis=1)
        future = total[states, choice[j]]
    picks = np.zeros(n_buyers, dtype=np.int64)
    s = 0
    for j in range(n_buyers):
        picks[j] = choice[j, s]
        s += offsets[picks[j]]
    return picks


@njit(cache=True, nogil=True)
def _welfare_dp_numba_core(bundle_values, supply, strides, n_states):
    n_buyers, n_bundles = bundle_values.shape
    m = supply.shape[0]
    offsets = np.zeros(n_bundles, dtype=np.int64)
    for b in range(n_bundles):
        for i in range(m):
            if (b >> i) & 1:
                offsets[b] += strides[i]
    future = np.zeros(n_states, dtype=np.int64)
    current = np.zeros(n_states, dtype=np.int64)
    choice = np.zeros((n_buyers, n_states), dtype=np.int64)
    digits = np.zeros(m, dtype=np.int64)
    for j in range(n_buyers - 1, -1, -1):
        for s in range(n_states):
            rem = s
            for i in range(m):
                digits[i] = rem % (supply[i] + 1)
                rem //= supply[i] + 1
            best = 0
            best_b = -1
            for b in range(n_bundles):
                ok = True
                for i in range(m):
                    if (b >> i) & 1 and digits[i] >= supply[i]:
                        ok = False
                        break
                if not ok:
                    continue
                total = bundle_values[j, b] + future[s + offsets[b]]
                if best_b < 0 or total > best:
                    best = total
                    best_b = b
            current[s] = best
            choice[j, s] = best_b
        for s in range(n_states):
            future[s] = current[s]
    picks = np.zeros(n_buyers, dtype=np.int64)
    s = 0
    for j in range(n_buyers):
        picks[j] = choice[j, s]
        s += offsets[picks[j]]
    return picks


def welfare_dp_numba(bundle_values: np.ndarray, supply: np.ndarray) -> np.ndarray:
    supply, strides, n_states = _state_layout(supply)
    return _welfare_dp_numba_core(bundle_values, supply, strides, n_states)


def welfare_dp(bundle_values: np.ndarray, supply) -> np.ndarray:
    """Per-buyer bundle masks maximising the summed ``bundle_values``.

    ``bundle_values[j, b]`` is buyer j's (scaled, integer) score for the
    bundle with bitmask ``b``; ``supply[i]`` caps how many buyers may take
    good i.  The first maximiser in bundle-mask order wins at every stage.
    """
    bundle_values = np.ascontiguousarray(bundle_values, dtype=np.int64)
    if USE_NUMBA:
        return welfare_dp_numba(bundle_values, supply)
    return welfare_dp_numpy(bundle_values, supply)


def dp_state_count(supply) -> int:
    return _state_layout(supply)[2]


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
