"""Pure-numpy implementations of the hot array kernels.

Focal sets are int64 bit masks and masses are float64, held in parallel
arrays.  The numba backend in ``_kernels_numba`` implements the same
contracts with explicit loops; keep the two behaviorally identical.
"""

from __future__ import annotations

import numpy as np

NAME = "numpy"


def group_sum(bits: np.ndarray, masses: np.ndarray):
    """Merge duplicate bit masks, summing their masses.

    Returns ``(unique_bits_sorted, summed_masses)``.
    """
    if bits.size == 0:
        return bits[:0].copy(), masses[:0].copy()
    unique, inverse = np.unique(bits, return_inverse=True)
    return unique, np.bincount(inverse, weights=masses, minlength=unique.size)


def pairwise_combine(bits1, masses1, bits2, masses2):
    """All pairwise intersections with product masses, grouped by result.

    Empty intersections are dropped and their product mass is returned as
    the third element (the raw conflict mass).  No renormalization happens
    here; the caller decides how to condition on nonemptiness.
    """
    inter = (bits1[:, None] & bits2[None, :]).ravel()
    prod = (masses1[:, None] * masses2[None, :]).ravel()
    empty = inter == 0
    conflict = float(prod[empty].sum())
    out_bits, out_masses = group_sum(inter[~empty], prod[~empty])
    return out_bits, out_masses, conflict


def touched_blocks(bits, block_bits):
    """For each mask, the bitset of partition blocks it intersects."""
    hits = (bits[:, None] & block_bits[None, :]) != 0
    weights = np.int64(1) << np.arange(block_bits.size, dtype=np.int64)
    return hits.astype(np.int64) @ weights


def union_of_blocks(selection_bits, block_bits):
    """For each block-index bitset, the union of the selected block masks."""
    k = block_bits.size
    chosen = ((selection_bits[:, None] >> np.arange(k, dtype=np.int64)[None, :]) & 1).astype(bool)
    return np.bitwise_or.reduce(
        np.where(chosen, block_bits[None, :], np.int64(0)), axis=1
    )


def belief_values(bits, masses, queries, full):
    """Belief of each query subset: total mass of focal sets inside it."""
    complement = full ^ queries
    inside = (bits[None, :] & complement[:, None]) == 0
    return inside @ masses


def belief_table(bits, masses, n):
    """Belief of every one of the 2**n subsets, indexed by subset bits."""
    full = (np.int64(1) << np.int64(n)) - np.int64(1)
    queries = np.arange(int(full) + 1, dtype=np.int64)
    return belief_values(bits, masses, queries, full)


def mobius(bel):
    """Invert a full belief table into a mass table (same indexing).

    Naive inclusion-exclusion over the subsets of each entry; adequate for
    the small frames this operation is capped at.
    """
    size = bel.shape[0]
    idx = np.arange(size, dtype=np.int64)
    pc = np.bitwise_count(idx).astype(np.int64)
    out = np.empty(size, dtype=np.float64)
    for a in range(size):
        subs = idx[(idx & a) == idx]
        signs = 1.0 - 2.0 * (((pc[a] - pc[subs]) & 1).astype(np.float64))
        out[a] = float(signs @ bel[subs])
    return out
