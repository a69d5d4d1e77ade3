"""Frames of discernment, subset bit masks, partitions, and the partition lattice.

A :class:`Frame` fixes an ordered universe of mutually exclusive answers to
one question; subsets of it are fixed-width bit masks indexed by element
position (:class:`SubsetMask`).  A :class:`Partition` splits the frame into
disjoint covering blocks and doubles as a coarse frame: its blocks become
the elements ``"B0", "B1", ...`` of a derived :class:`Frame`, so mass
functions can live on the base frame or on any partition of it with the
same machinery.

The lattice operations (:func:`meet`, :func:`is_coarser`) and the
qualitative independence tests enumerate block selections directly; node
partitions are small by design, so nothing smarter is attempted.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import (
    DuplicateLabel,
    EmptyBlock,
    EmptySubset,
    FrameMismatch,
    FrameTooLarge,
    IncompleteCover,
    OverlappingBlocks,
)

#: Frames are capped because focal-set enumeration is exponential in the
#: frame size; partitions at tree nodes are meant to stay small.
MAX_FRAME_SIZE = 24


class Frame:
    """An ordered finite set of mutually exclusive answers.

    Element order is fixed at creation and defines bit positions for
    subset masks.  Identity is by content: two frames with the same label
    sequence compare equal and interoperate.
    """

    __slots__ = ("labels", "_index", "full_bits")

    def __init__(self, labels: Iterable[str], *, max_size: int = MAX_FRAME_SIZE):
        labels = tuple(labels)
        if not labels:
            raise EmptySubset("a frame needs at least one element")
        if len(set(labels)) != len(labels):
            seen = set()
            dup = next(x for x in labels if x in seen or seen.add(x))
            raise DuplicateLabel(f"duplicate frame label {dup!r}")
        if len(labels) > max_size:
            raise FrameTooLarge(f"frame has {len(labels)} elements, cap is {max_size}")
        self.labels = labels
        self._index = {label: i for i, label in enumerate(labels)}
        self.full_bits = (1 << len(labels)) - 1

    @property
    def size(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise FrameMismatch(f"label {label!r} is not in this frame") from None

    def subset(self, labels: Iterable[str] = ()) -> "SubsetMask":
        bits = 0
        for label in labels:
            bits |= 1 << self.index(label)
        return SubsetMask(self, bits)

    def subset_from_bits(self, bits: int) -> "SubsetMask":
        return SubsetMask(self, bits)

    def singleton(self, label: str) -> "SubsetMask":
        return SubsetMask(self, 1 << self.index(label))

    def full(self) -> "SubsetMask":
        return SubsetMask(self, self.full_bits)

    def empty(self) -> "SubsetMask":
        return SubsetMask(self, 0)

    def __eq__(self, other) -> bool:
        return isinstance(other, Frame) and self.labels == other.labels

    def __hash__(self) -> int:
        return hash(self.labels)

    def __repr__(self) -> str:
        return f"Frame({list(self.labels)!r})"


def make_frame(labels: Sequence[str], *, max_size: int = MAX_FRAME_SIZE) -> Frame:
    """Build a frame from distinct element labels."""
    return Frame(labels, max_size=max_size)


class SubsetMask:
    """A subset of a frame as a fixed-width bit mask.

    Operations between masks of different frames raise
    :class:`FrameMismatch`; complements stay within the frame width.
    """

    __slots__ = ("frame", "bits")

    def __init__(self, frame: Frame, bits: int):
        if bits < 0 or bits > frame.full_bits:
            raise ValueError(f"bits 0x{bits:x} out of range for frame of size {frame.size}")
        self.frame = frame
        self.bits = bits

    def _check(self, other: "SubsetMask") -> None:
        if not isinstance(other, SubsetMask):
            raise TypeError(f"expected SubsetMask, got {type(other).__name__}")
        if self.frame != other.frame:
            raise FrameMismatch("subsets live on different frames")

    # set algebra ---------------------------------------------------------

    def union(self, other: "SubsetMask") -> "SubsetMask":
        self._check(other)
        return SubsetMask(self.frame, self.bits | other.bits)

    def intersection(self, other: "SubsetMask") -> "SubsetMask":
        self._check(other)
        return SubsetMask(self.frame, self.bits & other.bits)

    def difference(self, other: "SubsetMask") -> "SubsetMask":
        self._check(other)
        return SubsetMask(self.frame, self.bits & ~other.bits)

    def complement(self) -> "SubsetMask":
        return SubsetMask(self.frame, self.frame.full_bits ^ self.bits)

    def is_subset(self, other: "SubsetMask") -> bool:
        self._check(other)
        return self.bits & ~other.bits == 0

    def is_disjoint(self, other: "SubsetMask") -> bool:
        self._check(other)
        return self.bits & other.bits == 0

    __or__ = union
    __and__ = intersection
    __sub__ = difference
    __invert__ = complement
    __le__ = is_subset

    @property
    def is_empty(self) -> bool:
        return self.bits == 0

    @property
    def is_full(self) -> bool:
        return self.bits == self.frame.full_bits

    def cardinality(self) -> int:
        return self.bits.bit_count()

    def labels(self) -> tuple[str, ...]:
        return tuple(
            label for i, label in enumerate(self.frame.labels) if self.bits >> i & 1
        )

    def __contains__(self, label: str) -> bool:
        return self.bits >> self.frame.index(label) & 1 == 1

    def __iter__(self) -> Iterator[str]:
        return iter(self.labels())

    def __len__(self) -> int:
        return self.cardinality()

    def __bool__(self) -> bool:
        return self.bits != 0

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SubsetMask)
            and self.frame == other.frame
            and self.bits == other.bits
        )

    def __hash__(self) -> int:
        return hash((self.frame.labels, self.bits))

    def __repr__(self) -> str:
        return f"SubsetMask({{{', '.join(self.labels())}}})"


class Partition:
    """Disjoint, nonempty blocks covering the frame.

    Blocks are kept in canonical order (ascending smallest contained
    element index), which makes partition equality and serialization
    deterministic.  The blocks also act as the elements of a coarse
    frame, exposed as :attr:`coarse_frame` with labels ``"B0", "B1", ...``
    in canonical block order.
    """

    __slots__ = ("frame", "blocks", "coarse_frame", "_block_bits", "_element_block")

    def __init__(self, frame: Frame, blocks: Iterable[SubsetMask]):
        blocks = tuple(blocks)
        union = 0
        for block in blocks:
            if block.frame != frame:
                raise FrameMismatch("partition block lives on a different frame")
            if block.bits == 0:
                raise EmptyBlock("partition blocks must be nonempty")
            if union & block.bits:
                overlap = SubsetMask(frame, union & block.bits)
                raise OverlappingBlocks(f"blocks overlap on {set(overlap.labels())}")
            union |= block.bits
        if union != frame.full_bits:
            missing = SubsetMask(frame, frame.full_bits ^ union)
            raise IncompleteCover(f"blocks do not cover {set(missing.labels())}")
        # canonical order: by smallest contained element index
        blocks = tuple(sorted(blocks, key=lambda b: b.bits & -b.bits))
        self.frame = frame
        self.blocks = blocks
        self.coarse_frame = Frame(tuple(f"B{i}" for i in range(len(blocks))))
        self._block_bits = np.array([b.bits for b in blocks], dtype=np.int64)
        element_block = [0] * frame.size
        for bi, block in enumerate(blocks):
            for i in range(frame.size):
                if block.bits >> i & 1:
                    element_block[i] = bi
        self._element_block = tuple(element_block)

    @classmethod
    def from_labels(cls, frame: Frame, blocks: Iterable[Iterable[str]]) -> "Partition":
        return cls(frame, [frame.subset(b) for b in blocks])

    @property
    def block_count(self) -> int:
        return len(self.blocks)

    @property
    def block_bits(self) -> np.ndarray:
        """Block masks as an int64 array, canonical order (do not mutate)."""
        return self._block_bits

    @property
    def is_trivial(self) -> bool:
        return len(self.blocks) == 1

    def block_index_of(self, label: str) -> int:
        return self._element_block[self.frame.index(label)]

    def block_set(self, indices: Iterable[int]) -> "BlockSet":
        bits = 0
        for i in indices:
            if not 0 <= i < len(self.blocks):
                raise IndexError(f"block index {i} out of range")
            bits |= 1 << i
        return BlockSet(self, bits)

    def full_block_set(self) -> "BlockSet":
        return BlockSet(self, (1 << len(self.blocks)) - 1)

    def blocks_touching(self, subset: SubsetMask) -> "BlockSet":
        """The set of blocks intersecting ``subset`` (must be nonempty)."""
        if subset.frame != self.frame:
            raise FrameMismatch("subset lives on a different frame")
        if subset.bits == 0:
            raise EmptySubset("blocks_touching is undefined for the empty subset")
        bits = 0
        for i, block in enumerate(self.blocks):
            if block.bits & subset.bits:
                bits |= 1 << i
        return BlockSet(self, bits)

    def as_labels(self) -> list[list[str]]:
        return [list(block.labels()) for block in self.blocks]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Partition)
            and self.frame == other.frame
            and tuple(b.bits for b in self.blocks) == tuple(b.bits for b in other.blocks)
        )

    def __hash__(self) -> int:
        return hash((self.frame.labels, tuple(b.bits for b in self.blocks)))

    def __repr__(self) -> str:
        inner = ", ".join("{" + ", ".join(b.labels()) + "}" for b in self.blocks)
        return f"Partition([{inner}])"


def make_partition(frame: Frame, blocks: Sequence[SubsetMask]) -> Partition:
    """Build a partition, rejecting empty, overlapping, or non-covering blocks."""
    return Partition(frame, blocks)


def trivial_partition(frame: Frame) -> Partition:
    """The coarsest partition: a single block equal to the whole frame."""
    return Partition(frame, [frame.full()])


def singleton_partition(frame: Frame) -> Partition:
    """The finest partition: one block per element."""
    return Partition(frame, [frame.singleton(label) for label in frame.labels])


class BlockSet:
    """A subset of a partition's blocks, as a bit mask over block indices."""

    __slots__ = ("partition", "bits")

    def __init__(self, partition: Partition, bits: int):
        if bits < 0 or bits >> partition.block_count:
            raise ValueError(f"block bits 0x{bits:x} out of range")
        self.partition = partition
        self.bits = bits

    def indices(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.partition.block_count) if self.bits >> i & 1)

    def blocks(self) -> tuple[SubsetMask, ...]:
        return tuple(self.partition.blocks[i] for i in self.indices())

    def union(self) -> SubsetMask:
        """Union of the selected blocks, as a subset of the base frame."""
        bits = 0
        for i in self.indices():
            bits |= self.partition.blocks[i].bits
        return SubsetMask(self.partition.frame, bits)

    def as_coarse_subset(self) -> SubsetMask:
        """The same set viewed as a subset of the partition's coarse frame."""
        return SubsetMask(self.partition.coarse_frame, self.bits)

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __bool__(self) -> bool:
        return self.bits != 0

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BlockSet)
            and self.partition == other.partition
            and self.bits == other.bits
        )

    def __hash__(self) -> int:
        return hash((hash(self.partition), self.bits))

    def __repr__(self) -> str:
        inner = ", ".join("{" + ", ".join(b.labels()) + "}" for b in self.blocks())
        return f"BlockSet([{inner}])"


def blocks_touching(subset: SubsetMask, partition: Partition) -> BlockSet:
    """The blocks of ``partition`` that intersect ``subset``."""
    return partition.blocks_touching(subset)


def _check_common_frame(parts: Sequence[Partition]) -> Frame:
    frame = parts[0].frame
    for p in parts[1:]:
        if p.frame != frame:
            raise FrameMismatch("partitions live on different frames")
    return frame


def is_coarser(p1: Partition, p2: Partition) -> bool:
    """True iff every block of ``p2`` is contained in some block of ``p1``.

    This is the non-strict order: a partition is coarser-or-equal than
    itself.  See :func:`is_strictly_coarser` for the strict form.
    """
    _check_common_frame((p1, p2))
    for block in p2.blocks:
        low = (block.bits & -block.bits).bit_length() - 1
        holder = p1.blocks[p1._element_block[low]]
        if block.bits & ~holder.bits:
            return False
    return True


def is_strictly_coarser(p1: Partition, p2: Partition) -> bool:
    """Coarser-or-equal and not equal."""
    return p1 != p2 and is_coarser(p1, p2)


def meet(parts: Sequence[Partition]) -> Partition:
    """Coarsest common refinement: all nonempty intersections of one block
    from each input partition."""
    if not parts:
        raise ValueError("meet of an empty partition list is undefined")
    frame = _check_common_frame(parts)
    blocks = [b.bits for b in parts[0].blocks]
    for p in parts[1:]:
        blocks = [
            inter
            for bits in blocks
            for block in p.blocks
            if (inter := bits & block.bits)
        ]
    return Partition(frame, [SubsetMask(frame, bits) for bits in blocks])


def qualitatively_independent(parts: Sequence[Partition]) -> bool:
    """True iff every selection of one block per partition intersects.

    Requires at least two partitions; partitions must share a frame.
    """
    if len(parts) < 2:
        raise ValueError("qualitative independence needs at least two partitions")
    frame = _check_common_frame(parts)
    return conditional_independence_witness(parts, trivial_partition(frame)) is None


def qualitatively_cond_independent(
    parts: Sequence[Partition], given: Partition
) -> bool:
    """Conditional form of qualitative independence.

    True iff for every block ``P`` of ``given`` and every block selection
    with ``P & P_i`` nonempty for all ``i``, the joint intersection
    ``P & P_1 & ... & P_n`` is nonempty.  Conditioning on the trivial
    partition reduces to plain qualitative independence.
    """
    _check_common_frame(tuple(parts) + (given,))
    return conditional_independence_witness(parts, given) is None


def conditional_independence_witness(
    parts: Sequence[Partition], given: Partition
) -> tuple[SubsetMask, tuple[SubsetMask, ...]] | None:
    """A violating ``(given_block, block_selection)`` pair, or None.

    The returned selection passes the pairwise filter (each block meets the
    conditioning block) yet intersects jointly to the empty set.
    """
    if parts:
        _check_common_frame(tuple(parts) + (given,))
    for given_block in given.blocks:
        candidates = [
            [b for b in p.blocks if b.bits & given_block.bits] for p in parts
        ]
        chosen: list[SubsetMask] = []

        def descend(depth: int, inter: int) -> bool:
            if inter == 0:
                # any completion keeps the joint intersection empty
                for rest in candidates[depth:]:
                    chosen.append(rest[0])
                return True
            if depth == len(candidates):
                return False
            for block in candidates[depth]:
                chosen.append(block)
                if descend(depth + 1, inter & block.bits):
                    return True
                chosen.pop()
            return False

        if descend(0, given_block.bits):
            return given_block, tuple(chosen)
    return None
