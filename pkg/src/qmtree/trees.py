"""Undirected networks of partition-labeled nodes, separation, and
qualitative Markov tree validation.

A network is qualitatively Markov when separation of node sets by a third
set implies qualitative conditional independence of the corresponding
partition meets.  For trees this has a node-local characterization: at
every node ``j``, the meets of the partitions in the subtrees hanging off
``j`` must be qualitatively conditionally independent given ``j``'s own
partition.  :func:`validate_markov` checks the node-local form;
:func:`is_qualitative_markov_network` checks the separation-based
definition directly (exponential; kept for cross-checking on small cases).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _backend as K
from .errors import (
    DuplicateEdge,
    FrameMismatch,
    NotAnEdge,
    NotATree,
    OverlappingSets,
    SelfLoop,
    UnknownNode,
)
from .frames import (
    Frame,
    Partition,
    conditional_independence_witness,
    meet,
    trivial_partition,
)


class Network:
    """Nodes carrying partitions of one frame, joined by undirected edges."""

    __slots__ = ("frame", "partitions", "edges", "_neighbors")

    def __init__(
        self,
        frame: Frame,
        partitions: Mapping[str, Partition],
        edges: Iterable[tuple[str, str]],
    ):
        self.frame = frame
        self.partitions = dict(partitions)
        for node, part in self.partitions.items():
            if part.frame != frame:
                raise FrameMismatch(f"partition at node {node!r} is on a different frame")
        canonical: list[tuple[str, str]] = []
        seen = set()
        for a, b in edges:
            if a not in self.partitions:
                raise UnknownNode(f"edge endpoint {a!r} is not a node")
            if b not in self.partitions:
                raise UnknownNode(f"edge endpoint {b!r} is not a node")
            if a == b:
                raise SelfLoop(f"edge ({a!r}, {b!r}) joins a node to itself")
            key = (a, b) if a < b else (b, a)
            if key in seen:
                raise DuplicateEdge(f"edge {key!r} appears twice")
            seen.add(key)
            canonical.append(key)
        self.edges = tuple(sorted(canonical))
        neighbors: dict[str, list[str]] = {node: [] for node in self.partitions}
        for a, b in self.edges:
            neighbors[a].append(b)
            neighbors[b].append(a)
        self._neighbors = {node: tuple(sorted(ns)) for node, ns in neighbors.items()}

    @property
    def node_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self.partitions))

    def neighbors(self, node: str) -> tuple[str, ...]:
        try:
            return self._neighbors[node]
        except KeyError:
            raise UnknownNode(f"no node {node!r}") from None

    def is_leaf(self, node: str) -> bool:
        return len(self.neighbors(node)) == 1

    def partition_of(self, node: str) -> Partition:
        try:
            return self.partitions[node]
        except KeyError:
            raise UnknownNode(f"no node {node!r}") from None


def build_network(
    frame: Frame,
    partitions: Mapping[str, Partition],
    edges: Iterable[tuple[str, str]],
) -> Network:
    """Validated network; edges are canonicalized to sorted pairs."""
    return Network(frame, partitions, edges)


def is_tree(net: Network) -> bool:
    """Connected and acyclic."""
    nodes = net.node_ids
    if len(net.edges) != len(nodes) - 1:
        return False
    return len(_component(net, nodes[0], ())) == len(nodes)


def _component(net: Network, start: str, removed: Sequence[str]) -> set[str]:
    """Nodes reachable from ``start`` without entering ``removed``."""
    blocked = set(removed)
    seen = {start}
    stack = [start]
    while stack:
        current = stack.pop()
        for nxt in net.neighbors(current):
            if nxt not in seen and nxt not in blocked:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def separates(
    net: Network,
    j1: Iterable[str],
    j2: Iterable[str],
    j3: Iterable[str],
) -> bool:
    """True iff every path from ``j1`` to ``j2`` passes through ``j3``.

    The three node sets must be mutually disjoint.  An empty ``j1`` or
    ``j2`` is vacuously separated.
    """
    s1, s2, s3 = set(j1), set(j2), set(j3)
    for s in (s1, s2, s3):
        for node in s:
            if node not in net.partitions:
                raise UnknownNode(f"no node {node!r}")
    if s1 & s2 or s1 & s3 or s2 & s3:
        raise OverlappingSets("the three node sets must be mutually disjoint")
    reached: set[str] = set()
    for start in s1:
        if start not in reached:
            reached |= _component(net, start, tuple(s3))
    return not (reached & s2)


class MarkovTree:
    """A connected, acyclic network with per-edge block-incidence kernels.

    ``markov_validated`` starts False and latches True once
    :func:`validate_markov` passes.
    """

    __slots__ = ("network", "_kernel_rows", "_markov_validated")

    def __init__(self, network: Network):
        if not is_tree(network):
            raise NotATree("the network must be connected and acyclic")
        self.network = network
        self._kernel_rows: dict[tuple[str, str], np.ndarray] = {}
        self._markov_validated = False

    @property
    def frame(self) -> Frame:
        return self.network.frame

    @property
    def node_ids(self) -> tuple[str, ...]:
        return self.network.node_ids

    @property
    def markov_validated(self) -> bool:
        return self._markov_validated

    def neighbors(self, node: str) -> tuple[str, ...]:
        return self.network.neighbors(node)

    def partition_of(self, node: str) -> Partition:
        return self.network.partition_of(node)

    def directed_edges(self) -> tuple[tuple[str, str], ...]:
        """Both orientations of every edge, sorted."""
        out = []
        for a, b in self.network.edges:
            out.append((a, b))
            out.append((b, a))
        return tuple(sorted(out))

    def kernel_rows(self, source: str, target: str) -> np.ndarray:
        """Per source-block bitsets of the target blocks it intersects.

        Row ``r`` holds, as bits over the target partition's blocks, the
        blocks intersecting block ``r`` of the source partition.  This is
        the precomputed support for projecting messages along the edge.
        """
        key = (source, target)
        cached = self._kernel_rows.get(key)
        if cached is not None:
            return cached
        if key not in set(self.directed_edges()):
            if source not in self.network.partitions:
                raise UnknownNode(f"no node {source!r}")
            if target not in self.network.partitions:
                raise UnknownNode(f"no node {target!r}")
            raise NotAnEdge(f"({source!r}, {target!r}) is not an edge")
        rows = K.touched_blocks(
            self.partition_of(source).block_bits,
            self.partition_of(target).block_bits,
        )
        self._kernel_rows[key] = rows
        return rows


def as_tree(net: Network) -> MarkovTree:
    """Wrap a network as a tree, or raise :class:`NotATree`."""
    return MarkovTree(net)


def subtree_components(tree: MarkovTree, node: str) -> tuple[frozenset[str], ...]:
    """The node sets of the subtrees obtained by deleting ``node``.

    One component per neighbor, in sorted neighbor order; together they
    partition the remaining nodes.
    """
    return tuple(
        frozenset(_component(tree.network, k, (node,)))
        for k in tree.neighbors(node)
    )


def edge_kernel(tree: MarkovTree, i: str, j: str) -> np.ndarray:
    """Block-incidence matrix of an edge.

    Entry ``[p, q]`` is True iff block ``p`` of node ``i``'s partition
    intersects block ``q`` of node ``j``'s.  ``edge_kernel(tree, j, i)``
    is the transpose.
    """
    rows = tree.kernel_rows(i, j)
    cols = tree.partition_of(j).block_count
    shifts = np.arange(cols, dtype=np.int64)
    return (rows[:, None] >> shifts[None, :] & 1).astype(bool)


@dataclass(frozen=True)
class MarkovReport:
    """Outcome of the node-local qualitative Markov check."""

    ok: bool
    node: str | None = None
    witness: dict | None = None
    checked_nodes: tuple[str, ...] = field(default_factory=tuple)

    def to_json(self) -> dict:
        doc: dict = {"ok": self.ok, "checked_nodes": list(self.checked_nodes)}
        if not self.ok:
            doc["node"] = self.node
            doc["witness"] = self.witness
        return doc


def validate_markov(tree: MarkovTree) -> MarkovReport:
    """Check the node-local qualitative Markov condition at every node.

    At each node ``j``: split the tree at ``j``, take the meet of the
    partitions in each resulting component, and require those meets to be
    qualitatively conditionally independent given ``j``'s partition.  On
    failure the report carries the first violating node and a witness
    block selection; on success the tree's ``markov_validated`` flag is
    latched.
    """
    checked = []
    for node in tree.node_ids:
        components = subtree_components(tree, node)
        meets = [
            meet([tree.partition_of(i) for i in sorted(component)])
            for component in components
        ]
        violation = conditional_independence_witness(meets, tree.partition_of(node))
        checked.append(node)
        if violation is not None:
            given_block, selection = violation
            witness = {
                "given_block": list(given_block.labels()),
                "selection": [list(block.labels()) for block in selection],
                "components": [sorted(component) for component in components],
            }
            return MarkovReport(False, node, witness, tuple(checked))
    tree._markov_validated = True
    return MarkovReport(True, checked_nodes=tuple(checked))


def is_qualitative_markov_network(net: Network) -> bool:
    """Direct separation-based definition of a qualitative Markov network.

    Enumerates every assignment of nodes into three disjoint sets (plus
    "unused"), and for each separated pair of nonempty sets requires the
    meets of their partitions to be qualitatively conditionally
    independent given the meet of the separating set.  Exponential in the
    node count; intended for small cross-checks only.
    """
    nodes = net.node_ids
    frame = net.frame
    trivial = trivial_partition(frame)
    for assignment in _ternary_assignments(len(nodes)):
        groups: tuple[list[str], list[str], list[str]] = ([], [], [])
        for node, where in zip(nodes, assignment):
            if where < 3:
                groups[where].append(node)
        j1, j2, j3 = groups
        if not j1 or not j2:
            continue
        if not separates(net, j1, j2, j3):
            continue
        meet1 = meet([net.partition_of(n) for n in j1])
        meet2 = meet([net.partition_of(n) for n in j2])
        meet3 = meet([net.partition_of(n) for n in j3]) if j3 else trivial
        if conditional_independence_witness([meet1, meet2], meet3) is not None:
            return False
    return True


def _ternary_assignments(n: int):
    """All assignments of n items to {0, 1, 2, unused}."""
    total = 4 ** n
    for code in range(total):
        yield tuple(code // 4 ** i % 4 for i in range(n))
