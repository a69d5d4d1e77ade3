"""Numba-jitted implementations of the hot array kernels.

Same contracts as ``_kernels_numpy``; explicit loops compiled with
``@njit(cache=True)`` so the compilation cost is paid once per machine.
"""

from __future__ import annotations

import numpy as np
from numba import njit

NAME = "numba"


@njit(cache=True)
def _popcount(x):
    count = 0
    while x:
        x &= x - 1
        count += 1
    return count


@njit(cache=True)
def group_sum(bits, masses):
    n = bits.shape[0]
    out_bits = np.empty(n, np.int64)
    out_masses = np.empty(n, np.float64)
    if n == 0:
        return out_bits, out_masses
    order = np.argsort(bits)
    count = 0
    out_bits[0] = bits[order[0]]
    out_masses[0] = masses[order[0]]
    for i in range(1, n):
        b = bits[order[i]]
        m = masses[order[i]]
        if b == out_bits[count]:
            out_masses[count] += m
        else:
            count += 1
            out_bits[count] = b
            out_masses[count] = m
    return out_bits[:count + 1].copy(), out_masses[:count + 1].copy()


@njit(cache=True)
def pairwise_combine(bits1, masses1, bits2, masses2):
    n1 = bits1.shape[0]
    n2 = bits2.shape[0]
    raw_bits = np.empty(n1 * n2, np.int64)
    raw_masses = np.empty(n1 * n2, np.float64)
    conflict = 0.0
    kept = 0
    for i in range(n1):
        for j in range(n2):
            inter = bits1[i] & bits2[j]
            prod = masses1[i] * masses2[j]
            if inter == 0:
                conflict += prod
            else:
                raw_bits[kept] = inter
                raw_masses[kept] = prod
                kept += 1
    out_bits, out_masses = group_sum(raw_bits[:kept], raw_masses[:kept])
    return out_bits, out_masses, conflict


@njit(cache=True)
def touched_blocks(bits, block_bits):
    n = bits.shape[0]
    k = block_bits.shape[0]
    out = np.zeros(n, np.int64)
    for i in range(n):
        touched = 0
        for j in range(k):
            if bits[i] & block_bits[j]:
                touched |= 1 << j
        out[i] = touched
    return out


@njit(cache=True)
def union_of_blocks(selection_bits, block_bits):
    n = selection_bits.shape[0]
    k = block_bits.shape[0]
    out = np.zeros(n, np.int64)
    for i in range(n):
        union = 0
        for j in range(k):
            if selection_bits[i] & (1 << j):
                union |= block_bits[j]
        out[i] = union
    return out


@njit(cache=True)
def belief_values(bits, masses, queries, full):
    nq = queries.shape[0]
    nf = bits.shape[0]
    out = np.zeros(nq, np.float64)
    for q in range(nq):
        complement = full ^ queries[q]
        total = 0.0
        for f in range(nf):
            if bits[f] & complement == 0:
                total += masses[f]
        out[q] = total
    return out


@njit(cache=True)
def belief_table(bits, masses, n):
    full = (1 << n) - 1
    queries = np.arange(full + 1, dtype=np.int64)
    return belief_values(bits, masses, queries, full)


@njit(cache=True)
def mobius(bel):
    size = bel.shape[0]
    out = np.zeros(size, np.float64)
    for a in range(size):
        pa = _popcount(a)
        sub = a
        total = 0.0
        while True:
            if (pa - _popcount(sub)) & 1:
                total -= bel[sub]
            else:
                total += bel[sub]
            if sub == 0:
                break
            sub = (sub - 1) & a
        out[a] = total
    return out
