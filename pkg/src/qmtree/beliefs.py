"""Mass and belief functions on a frame; Dempster's rule; movement between
partitions by coarsening, vacuous extension, and projection.

A :class:`MassFunction` stores its focal sets as parallel arrays (int64 bit
masks, float64 masses) in ascending mask order.  Belief is the derived
view: ``Bel(A)`` sums the masses of focal sets contained in ``A``.

Combination follows Dempster's rule: intersect focal sets of independent
mass functions pairwise, discard empty intersections (the conflict mass),
and renormalize.  Total conflict is a hard error, never a silent result.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from . import _backend as K
from .errors import (
    FrameMismatch,
    FrameTooLarge,
    InvalidMassFunction,
    NotABeliefFunction,
    TotalConflict,
)
from .frames import BlockSet, Frame, Partition, SubsetMask

#: Tolerance for the sum-to-one invariant of mass functions.
EPS_MASS = 1e-9
#: Tolerance for comparing two mass functions per focal set.
EPS_CMP = 1e-9
#: Masses below this are treated as absent when comparing focal structures.
EPS_DROP = 1e-12
#: A combination whose surviving mass is at most this is total conflict.
EPS_CONFLICT = 1e-12
#: Belief-table inversion enumerates all subsets; cap the frame size.
MOBIUS_MAX_FRAME = 16


class MassFunction:
    """A map from nonempty focal subsets to positive masses summing to 1."""

    __slots__ = ("frame", "_bits", "_masses")

    def __init__(
        self,
        frame: Frame,
        entries: Mapping[SubsetMask, float] | Iterable[tuple[SubsetMask, float]],
    ):
        if isinstance(entries, Mapping):
            entries = entries.items()
        pairs = list(entries)
        bits = np.empty(len(pairs), dtype=np.int64)
        masses = np.empty(len(pairs), dtype=np.float64)
        for i, (subset, mass) in enumerate(pairs):
            if not isinstance(subset, SubsetMask):
                raise TypeError("focal sets must be SubsetMask values")
            if subset.frame != frame:
                raise FrameMismatch("focal set lives on a different frame")
            bits[i] = subset.bits
            masses[i] = mass
        built = MassFunction.from_arrays(frame, bits, masses)
        self.frame = frame
        self._bits = built._bits
        self._masses = built._masses

    @classmethod
    def from_arrays(
        cls, frame: Frame, bits: np.ndarray, masses: np.ndarray
    ) -> "MassFunction":
        """Build from parallel arrays, validating the invariants."""
        bits = np.asarray(bits, dtype=np.int64)
        masses = np.asarray(masses, dtype=np.float64)
        if bits.size == 0:
            raise InvalidMassFunction("a mass function needs at least one focal set")
        if np.any(bits == 0):
            raise InvalidMassFunction("focal sets must be nonempty")
        if np.any(bits < 0) or np.any(bits > frame.full_bits):
            raise InvalidMassFunction("focal bits out of range for the frame")
        if np.any(masses <= 0.0):
            raise InvalidMassFunction("masses must be strictly positive")
        order = np.argsort(bits)
        bits = bits[order]
        masses = masses[order]
        if np.any(bits[1:] == bits[:-1]):
            raise InvalidMassFunction("duplicate focal sets")
        total = float(masses.sum())
        if abs(total - 1.0) > EPS_MASS:
            raise InvalidMassFunction(f"masses sum to {total!r}, expected 1")
        mf = object.__new__(cls)
        mf.frame = frame
        mf._bits = bits
        mf._masses = masses
        return mf

    # -- views -------------------------------------------------------------

    @property
    def focal_count(self) -> int:
        return int(self._bits.size)

    @property
    def bits(self) -> np.ndarray:
        """Focal masks, ascending (do not mutate)."""
        return self._bits

    @property
    def masses(self) -> np.ndarray:
        """Masses aligned with :attr:`bits` (do not mutate)."""
        return self._masses

    def items(self) -> Iterator[tuple[SubsetMask, float]]:
        for b, m in zip(self._bits, self._masses):
            yield SubsetMask(self.frame, int(b)), float(m)

    def mass_of(self, subset: SubsetMask) -> float:
        if subset.frame != self.frame:
            raise FrameMismatch("subset lives on a different frame")
        where = np.searchsorted(self._bits, subset.bits)
        if where < self._bits.size and self._bits[where] == subset.bits:
            return float(self._masses[where])
        return 0.0

    def belief_of(self, subset: SubsetMask) -> float:
        return belief_of(self, subset)

    @property
    def is_vacuous(self) -> bool:
        return self.focal_count == 1 and int(self._bits[0]) == self.frame.full_bits

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MassFunction)
            and self.frame == other.frame
            and np.array_equal(self._bits, other._bits)
            and np.array_equal(self._masses, other._masses)
        )

    def __hash__(self) -> int:
        return hash((self.frame.labels, self._bits.tobytes(), self._masses.tobytes()))

    def __repr__(self) -> str:
        inner = ", ".join(
            "{" + ",".join(s.labels()) + "}:" + format(m, ".4g") for s, m in self.items()
        )
        return f"MassFunction({inner})"


@dataclass(frozen=True)
class CombinationReport:
    """Result of a Dempster combination plus the discarded conflict mass."""

    result: MassFunction
    conflict_mass: float


def vacuous(frame: Frame) -> MassFunction:
    """Total ignorance: all mass on the whole frame."""
    return MassFunction.from_arrays(
        frame, np.array([frame.full_bits], dtype=np.int64), np.array([1.0])
    )


def belief_of(m: MassFunction, subset: SubsetMask) -> float:
    """Bel(A): the total mass of focal sets contained in ``subset``."""
    if subset.frame != m.frame:
        raise FrameMismatch("subset lives on a different frame")
    values = K.belief_values(
        m._bits,
        m._masses,
        np.array([subset.bits], dtype=np.int64),
        np.int64(m.frame.full_bits),
    )
    return float(values[0])


def belief_table(m: MassFunction) -> np.ndarray:
    """Bel over all ``2**n`` subsets, indexed by subset bits."""
    if m.frame.size > MOBIUS_MAX_FRAME:
        raise FrameTooLarge(
            f"belief table over {m.frame.size} elements exceeds the cap of {MOBIUS_MAX_FRAME}"
        )
    return K.belief_table(m._bits, m._masses, m.frame.size)


def mass_from_belief(
    frame: Frame, bel: Mapping[SubsetMask, float] | np.ndarray
) -> MassFunction:
    """Invert a complete belief table back into a mass function.

    ``bel`` is either an array of length ``2**n`` indexed by subset bits or
    a mapping defined on every subset of the frame.  Raises
    :class:`NotABeliefFunction` if the inversion produces a mass below
    ``-EPS_MASS`` or puts weight on the empty set.
    """
    if frame.size > MOBIUS_MAX_FRAME:
        raise FrameTooLarge(
            f"inversion over {frame.size} elements exceeds the cap of {MOBIUS_MAX_FRAME}"
        )
    size = 1 << frame.size
    if isinstance(bel, np.ndarray):
        table = np.asarray(bel, dtype=np.float64)
        if table.shape != (size,):
            raise ValueError(f"belief table must have length {size}")
    else:
        table = np.empty(size, dtype=np.float64)
        filled = np.zeros(size, dtype=bool)
        for subset, value in bel.items():
            if subset.frame != frame:
                raise FrameMismatch("belief table entry on a different frame")
            table[subset.bits] = value
            filled[subset.bits] = True
        if not filled.all():
            raise ValueError("belief table must cover every subset of the frame")
    if abs(float(table[size - 1]) - 1.0) > EPS_MASS:
        raise NotABeliefFunction("the belief of the full frame must be 1")
    masses = K.mobius(table)
    if np.any(masses < -EPS_MASS):
        worst = float(masses.min())
        raise NotABeliefFunction(f"inversion yields negative mass {worst!r}")
    if masses[0] > EPS_MASS:
        raise NotABeliefFunction("table puts mass on the empty set")
    keep = masses > EPS_DROP
    keep[0] = False
    bits = np.nonzero(keep)[0].astype(np.int64)
    return MassFunction.from_arrays(frame, bits, masses[keep])


def dempster_combine(m1: MassFunction, m2: MassFunction) -> CombinationReport:
    """Orthogonal sum of two mass functions on one frame.

    Focal sets are all nonempty pairwise intersections with product
    masses; the empty-intersection mass is reported as ``conflict_mass``
    and removed by renormalization.  Raises :class:`TotalConflict` when
    essentially no mass survives.
    """
    if m1.frame != m2.frame:
        raise FrameMismatch("mass functions live on different frames")
    bits, masses, conflict = K.pairwise_combine(
        m1._bits, m1._masses, m2._bits, m2._masses
    )
    surviving = float(masses.sum()) if masses.size else 0.0
    if surviving <= EPS_CONFLICT:
        raise TotalConflict(conflict=conflict)
    result = MassFunction.from_arrays(m1.frame, bits, masses / surviving)
    return CombinationReport(result, conflict)


def combine_many(ms: Sequence[MassFunction]) -> CombinationReport:
    """Left fold of :func:`dempster_combine` over a nonempty list.

    The result is order-independent up to rounding.  The reported conflict
    aggregates multiplicatively: the surviving fraction of the raw product
    measure is the product of the per-step surviving fractions.
    """
    if not ms:
        raise ValueError("combine_many needs at least one mass function")
    frame = ms[0].frame
    for m in ms[1:]:
        if m.frame != frame:
            raise FrameMismatch("mass functions live on different frames")
    acc = ms[0]
    surviving_fraction = 1.0
    for m in ms[1:]:
        try:
            step = dempster_combine(acc, m)
        except TotalConflict as err:
            raise TotalConflict(
                conflict=1.0 - surviving_fraction * (1.0 - err.conflict)
            ) from None
        acc = step.result
        surviving_fraction *= 1.0 - step.conflict_mass
    return CombinationReport(acc, 1.0 - surviving_fraction)


def is_carried_by(m: MassFunction, partition: Partition) -> bool:
    """True iff every focal set is a union of blocks of ``partition``."""
    if m.frame != partition.frame:
        raise FrameMismatch("mass function and partition frames differ")
    touched = K.touched_blocks(m._bits, partition.block_bits)
    rebuilt = K.union_of_blocks(touched, partition.block_bits)
    return bool(np.array_equal(rebuilt, m._bits))


def associated_partition(m: MassFunction) -> Partition:
    """The coarsest partition carrying ``m``.

    Two elements share a block iff they lie in exactly the same focal
    sets; elements outside every focal set share the leftover block.
    """
    signatures: dict[int, int] = {}
    for e in range(m.frame.size):
        sig = 0
        for f, bits in enumerate(m._bits):
            if int(bits) >> e & 1:
                sig |= 1 << f
        signatures.setdefault(sig, 0)
        signatures[sig] |= 1 << e
    blocks = [SubsetMask(m.frame, bits) for bits in signatures.values()]
    return Partition(m.frame, blocks)


def coarsen(m: MassFunction, partition: Partition) -> MassFunction:
    """Restrict ``m`` to the coarse frame of ``partition``.

    Each focal set maps to the set of blocks it touches; masses of focal
    sets with the same touched-block set merge.  The result satisfies
    ``Bel_coarse(B) == Bel(union of B)`` for every block set ``B``.
    """
    if m.frame != partition.frame:
        raise FrameMismatch("mass function and partition frames differ")
    touched = K.touched_blocks(m._bits, partition.block_bits)
    bits, masses = K.group_sum(touched, m._masses)
    return MassFunction.from_arrays(partition.coarse_frame, bits, masses)


def vacuous_extend(m: MassFunction, partition: Partition) -> MassFunction:
    """Lift a mass function on ``partition``'s coarse frame back to the
    base frame, sending each focal block set to the union of its blocks."""
    if m.frame != partition.coarse_frame:
        raise FrameMismatch("mass function does not live on the partition's coarse frame")
    unions = K.union_of_blocks(m._bits, partition.block_bits)
    return MassFunction.from_arrays(partition.frame, unions, m._masses)


def project(m: MassFunction, source: Partition, target: Partition) -> MassFunction:
    """Move a mass function from one partition's coarse frame to another's.

    Equals vacuous extension to the base frame followed by coarsening, but
    computed directly: each focal block set of ``source`` maps to the
    blocks of ``target`` touched by its union.
    """
    if source.frame != target.frame:
        raise FrameMismatch("partitions live on different frames")
    if m.frame != source.coarse_frame:
        raise FrameMismatch("mass function does not live on the source coarse frame")
    unions = K.union_of_blocks(m._bits, source.block_bits)
    touched = K.touched_blocks(unions, target.block_bits)
    bits, masses = K.group_sum(touched, m._masses)
    return MassFunction.from_arrays(target.coarse_frame, bits, masses)


def coarsen_to_blocksets(m: MassFunction, partition: Partition) -> dict[BlockSet, float]:
    """Coarsening of ``m`` keyed by :class:`BlockSet` (convenience view)."""
    coarse = coarsen(m, partition)
    return {
        BlockSet(partition, int(b)): float(mass)
        for b, mass in zip(coarse._bits, coarse._masses)
    }


def mass_deviation(m1: MassFunction, m2: MassFunction, *, drop: float = EPS_DROP) -> float:
    """Largest per-focal-set mass difference, over the union of focal sets.

    Masses at or below ``drop`` count as absent.
    """
    if m1.frame != m2.frame:
        raise FrameMismatch("mass functions live on different frames")
    a = {int(b): float(m) for b, m in zip(m1._bits, m1._masses) if m > drop}
    b = {int(x): float(m) for x, m in zip(m2._bits, m2._masses) if m > drop}
    worst = 0.0
    for key in a.keys() | b.keys():
        worst = max(worst, abs(a.get(key, 0.0) - b.get(key, 0.0)))
    return worst


def approx_equal(
    m1: MassFunction,
    m2: MassFunction,
    *,
    tol: float = EPS_CMP,
    drop: float = EPS_DROP,
) -> bool:
    """Equality up to rounding: same focal sets after dropping masses at or
    below ``drop``, and per-set mass differences within ``tol``."""
    if m1.frame != m2.frame:
        return False
    a = {int(b) for b, m in zip(m1._bits, m1._masses) if m > drop}
    b = {int(x) for x, m in zip(m2._bits, m2._masses) if m > drop}
    if a != b:
        return False
    return mass_deviation(m1, m2, drop=drop) <= tol
