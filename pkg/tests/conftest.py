"""Shared fixtures, conversion helpers, and hypothesis strategies."""

from __future__ import annotations

import random

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from qmtree import Frame, MassFunction, Partition, SubsetMask

settings.register_profile(
    "qmtree",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("qmtree")


@pytest.fixture
def rng():
    return random.Random(20260808)


@pytest.fixture
def frame4():
    return Frame(["a", "b", "c", "d"])


# -- conversions between library objects and the set-based oracle world ----

def subset_to_set(s: SubsetMask) -> frozenset:
    return frozenset(s.labels())


def mass_to_sets(m: MassFunction) -> dict:
    return {frozenset(s.labels()): v for s, v in m.items()}


def partition_to_sets(p: Partition) -> list[frozenset]:
    return [frozenset(b.labels()) for b in p.blocks]


def coarse_mass_to_indexsets(m: MassFunction) -> dict:
    """Mass on a coarse frame -> dict keyed by frozensets of block indices."""
    out = {}
    for subset, value in m.items():
        out[frozenset(i for i in range(m.frame.size) if subset.bits >> i & 1)] = value
    return out


def dicts_close(d1: dict, d2: dict, tol: float = 1e-9) -> bool:
    keys = set(d1) | set(d2)
    return all(abs(d1.get(k, 0.0) - d2.get(k, 0.0)) <= tol for k in keys)


# -- hypothesis strategies ---------------------------------------------------

@st.composite
def frames(draw, min_size=2, max_size=6):
    size = draw(st.integers(min_size, max_size))
    return Frame([f"e{i}" for i in range(size)])


@st.composite
def partitions(draw, frame: Frame):
    k = draw(st.integers(1, frame.size))
    assignment = draw(
        st.lists(st.integers(0, k - 1), min_size=frame.size, max_size=frame.size)
    )
    used = sorted(set(assignment))
    bits = [0] * len(used)
    for pos, b in enumerate(assignment):
        bits[used.index(b)] |= 1 << pos
    return Partition(frame, [frame.subset_from_bits(x) for x in bits])


@st.composite
def mass_functions(draw, frame: Frame, max_focal=4, force_full=True):
    universe = frame.full_bits
    n = draw(st.integers(1, min(max_focal, universe)))
    focal = {universe} if force_full else set()
    focal |= set(
        draw(
            st.lists(
                st.integers(1, universe), min_size=n, max_size=n, unique=True
            )
        )
    )
    weights = draw(
        st.lists(
            st.floats(0.05, 1.0, allow_nan=False),
            min_size=len(focal),
            max_size=len(focal),
        )
    )
    total = sum(weights)
    return MassFunction(
        frame,
        [
            (frame.subset_from_bits(b), w / total)
            for b, w in zip(sorted(focal), weights)
        ],
    )


@st.composite
def framed_partitions(draw, n=2, min_size=2, max_size=6):
    """A frame plus ``n`` independent partitions of it."""
    frame = draw(frames(min_size, max_size))
    return frame, tuple(draw(partitions(frame)) for _ in range(n))


@st.composite
def framed_masses(draw, n=2, min_size=2, max_size=6, force_full=True):
    frame = draw(frames(min_size, max_size))
    return frame, tuple(
        draw(mass_functions(frame, force_full=force_full)) for _ in range(n)
    )
