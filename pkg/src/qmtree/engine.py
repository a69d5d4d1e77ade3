"""Local-computation engine for belief propagation on a qualitative Markov tree.

State per node: the list of entered evidence items (mass functions on the
node's coarse frame) and their running combination.  State per directed
edge ``j -> i``: an optional message, the combination of node ``j``'s local
evidence with its other inbound messages, projected onto node ``i``'s
partition.  A node's marginal combines its local evidence with all inbound
messages.

Two production rules drive everything:

* Rule 1 computes the message ``j -> i`` once node ``j``'s evidence and its
  other inbound messages are current.
* Rule 2 computes node ``n``'s marginal once all inbound messages are
  current.

Every stored message and marginal records the version stamps of the inputs
it was computed from.  A rule is enabled only while its output is missing
or stale, so no rule ever re-fires for an unchanged instantiation; entering
new evidence bumps the node's stamp and re-enables exactly the dependent
rules.  A cold-start batch run therefore fires Rule 1 once per directed
edge and Rule 2 once per node: ``3*|J| - 2`` firings on a tree of ``|J|``
nodes.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from typing import Mapping

from . import _backend as K
from . import beliefs
from .beliefs import MassFunction, combine_many, vacuous
from .errors import (
    FrameMismatch,
    InvalidTree,
    MissingInbound,
    NoRunYet,
    NotAnEdge,
    TotalConflict,
    UnknownNode,
)
from .frames import BlockSet, Partition
from .trees import MarkovTree, validate_markov

FiringLog = tuple["FiringEvent", ...]


@dataclass(frozen=True)
class FiringEvent:
    """One production-rule firing, with the input stamps it consumed."""

    seq: int
    rule: int
    src: str
    dst: str | None
    stamps: dict

    def to_json(self) -> dict:
        return {
            "seq": self.seq,
            "rule": self.rule,
            "from": self.src,
            "to": self.dst,
            "stamps": self.stamps,
        }


@dataclass(frozen=True)
class Marginal:
    """A node's output: the combined evidence coarsened to its partition."""

    node: str
    partition: Partition
    mass: MassFunction

    def belief_of(self, block_set: BlockSet) -> float:
        if block_set.partition != self.partition:
            raise FrameMismatch("block set belongs to a different partition")
        return beliefs.belief_of(self.mass, block_set.as_coarse_subset())

    def belief_table(self) -> dict[int, float]:
        """Belief of every nonempty block set, keyed by block bits."""
        table = beliefs.belief_table(self.mass)
        return {bits: float(table[bits]) for bits in range(1, table.size)}


@dataclass(frozen=True)
class _MessageRecord:
    mass: MassFunction
    own_stamp: int
    dep_bel: int
    dep_msgs: dict


@dataclass(frozen=True)
class _MarginalRecord:
    mass: MassFunction
    dep_bel: int
    dep_msgs: dict


class Engine:
    """Single-writer propagation engine over an immutable Markov tree.

    Values handed out (mass functions, marginals, events) are immutable;
    reads after quiescence are safe from any thread.  Mutation (evidence
    entry, propagation) must be serialized by the caller.
    """

    def __init__(self, tree: MarkovTree, *, validate: bool = True):
        if validate and not tree.markov_validated:
            report = validate_markov(tree)
            if not report.ok:
                raise InvalidTree(
                    f"tree fails the qualitative Markov check at node {report.node!r}"
                )
        self._tree = tree
        self._evidence: dict[str, list[MassFunction]] = {n: [] for n in tree.node_ids}
        self._bel: dict[str, MassFunction] = {
            n: vacuous(tree.partition_of(n).coarse_frame) for n in tree.node_ids
        }
        self._evidence_stamp: dict[str, int] = {n: 0 for n in tree.node_ids}
        self._messages: dict[tuple[str, str], _MessageRecord] = {}
        self._marginals: dict[str, _MarginalRecord] = {}
        self._log: list[FiringEvent] = []
        self._clock = 0
        self._has_run = False

    # -- introspection -------------------------------------------------------

    @property
    def tree(self) -> MarkovTree:
        return self._tree

    def evidence(self) -> Mapping[str, tuple[MassFunction, ...]]:
        """Entered evidence items per node, in entry order."""
        return {n: tuple(items) for n, items in self._evidence.items()}

    def local_belief(self, node: str) -> MassFunction:
        """The running combination of the node's entered evidence."""
        self._require_node(node)
        return self._bel[node]

    def stored_message(self, j: str, i: str) -> MassFunction | None:
        record = self._messages.get((j, i))
        return record.mass if record else None

    def firing_trace(self) -> FiringLog:
        """All firings so far, oldest first."""
        if not self._has_run:
            raise NoRunYet("no propagation has run on this engine")
        return tuple(self._log)

    def _require_node(self, node: str) -> None:
        if node not in self._evidence:
            raise UnknownNode(f"no node {node!r}")

    def _inbound(self, j: str, excluding: str | None = None) -> tuple[str, ...]:
        return tuple(k for k in self._tree.neighbors(j) if k != excluding)

    # -- evidence ------------------------------------------------------------

    def enter_evidence(self, node: str, m: MassFunction) -> None:
        """Append an independent evidence item at ``node``.

        The item must live on the node's coarse frame.  The node's running
        combination is updated immediately; everything derived from it
        goes stale via the version stamp.  Raises :class:`TotalConflict`
        (leaving the engine unchanged) if the node's own items become
        totally conflicting.
        """
        self._require_node(node)
        partition = self._tree.partition_of(node)
        if m.frame != partition.coarse_frame:
            raise FrameMismatch(
                f"evidence at {node!r} must live on the node's coarse frame"
            )
        if self._evidence[node]:
            try:
                combined = beliefs.dempster_combine(self._bel[node], m).result
            except TotalConflict as err:
                raise TotalConflict(
                    conflict=err.conflict, location=f"node {node}"
                ) from None
        else:
            combined = m
        self._evidence[node].append(m)
        self._bel[node] = combined
        self._evidence_stamp[node] += 1

    def clear_evidence(self, node: str) -> None:
        """Retract all evidence at ``node`` (there is no partial retraction:
        Dempster's rule has no general inverse)."""
        self._require_node(node)
        self._evidence[node] = []
        self._bel[node] = vacuous(self._tree.partition_of(node).coarse_frame)
        self._evidence_stamp[node] += 1

    # -- staleness -----------------------------------------------------------

    def _message_current(self, j: str, i: str) -> bool:
        record = self._messages.get((j, i))
        if record is None:
            return False
        if record.dep_bel != self._evidence_stamp[j]:
            return False
        for k in self._inbound(j, excluding=i):
            upstream = self._messages.get((k, j))
            if upstream is None or record.dep_msgs.get(k) != upstream.own_stamp:
                return False
            if not self._message_current(k, j):
                return False
        return True

    def _marginal_current(self, node: str) -> bool:
        record = self._marginals.get(node)
        if record is None:
            return False
        if record.dep_bel != self._evidence_stamp[node]:
            return False
        for k in self._inbound(node):
            upstream = self._messages.get((k, node))
            if upstream is None or record.dep_msgs.get(k) != upstream.own_stamp:
                return False
            if not self._message_current(k, node):
                return False
        return True

    def _rule1_enabled(self, j: str, i: str) -> bool:
        return all(
            self._message_current(k, j) for k in self._inbound(j, excluding=i)
        ) and not self._message_current(j, i)

    def _rule2_enabled(self, node: str) -> bool:
        return all(
            self._message_current(k, node) for k in self._inbound(node)
        ) and not self._marginal_current(node)

    # -- rule firings --------------------------------------------------------

    def compute_message(self, j: str, i: str) -> MassFunction:
        """Fire Rule 1 for the directed edge ``j -> i``.

        Combines node ``j``'s local evidence with its other inbound
        messages (in sorted neighbor order) and projects the result onto
        node ``i``'s partition through the edge kernel.  Requires the
        inbound messages to be present and current.
        """
        self._require_node(j)
        self._require_node(i)
        if i not in self._tree.neighbors(j):
            raise NotAnEdge(f"({j!r}, {i!r}) is not an edge")
        inbound = self._inbound(j, excluding=i)
        for k in inbound:
            if not self._message_current(k, j):
                raise MissingInbound(
                    f"message {k!r} -> {j!r} is missing or stale; propagate first"
                )
        parts = [self._bel[j]] + [self._messages[(k, j)].mass for k in inbound]
        try:
            combined = combine_many(parts).result
        except TotalConflict as err:
            raise TotalConflict(
                conflict=err.conflict, location=f"edge {j}->{i}"
            ) from None
        projected = self._project_along(combined, j, i)
        self._clock += 1
        record = _MessageRecord(
            mass=projected,
            own_stamp=self._clock,
            dep_bel=self._evidence_stamp[j],
            dep_msgs={k: self._messages[(k, j)].own_stamp for k in inbound},
        )
        self._messages[(j, i)] = record
        self._log_event(1, j, i, record.dep_bel, record.dep_msgs)
        return projected

    def _project_along(self, m: MassFunction, j: str, i: str) -> MassFunction:
        rows = self._tree.kernel_rows(j, i)
        bits = K.union_of_blocks(m.bits, rows)
        bits, masses = K.group_sum(bits, m.masses)
        return MassFunction.from_arrays(
            self._tree.partition_of(i).coarse_frame, bits, masses
        )

    def _fire_rule2(self, node: str) -> Marginal:
        inbound = self._inbound(node)
        for k in inbound:
            if not self._message_current(k, node):
                raise MissingInbound(
                    f"message {k!r} -> {node!r} is missing or stale; propagate first"
                )
        parts = [self._bel[node]] + [self._messages[(k, node)].mass for k in inbound]
        try:
            combined = combine_many(parts).result
        except TotalConflict as err:
            raise TotalConflict(
                conflict=err.conflict, location=f"node {node}"
            ) from None
        record = _MarginalRecord(
            mass=combined,
            dep_bel=self._evidence_stamp[node],
            dep_msgs={k: self._messages[(k, node)].own_stamp for k in inbound},
        )
        self._marginals[node] = record
        self._log_event(2, node, None, record.dep_bel, record.dep_msgs)
        return Marginal(node, self._tree.partition_of(node), combined)

    def _log_event(self, rule: int, src: str, dst: str | None,
                   bel_stamp: int, msg_stamps: dict) -> None:
        self._has_run = True
        self._log.append(
            FiringEvent(
                seq=len(self._log),
                rule=rule,
                src=src,
                dst=dst,
                stamps={
                    "bel": {src: bel_stamp},
                    "messages": {f"{k}->{src}": v for k, v in sorted(msg_stamps.items())},
                },
            )
        )

    # -- queries -------------------------------------------------------------

    def marginal(self, node: str, *, strict: bool = False) -> Marginal:
        """The node's marginal on its own partition.

        By default any missing or stale inputs are computed on demand
        (firing exactly the stale rules in its subtree, under the same
        refractory discipline as a full propagation).  With
        ``strict=True`` the inbound messages must already be current, or
        :class:`MissingInbound` is raised.
        """
        self._require_node(node)
        if strict:
            for k in self._inbound(node):
                if not self._message_current(k, node):
                    raise MissingInbound(
                        f"message {k!r} -> {node!r} is missing or stale; propagate first"
                    )
            if not self._marginal_current(node):
                self._fire_rule2(node)
        elif not self._marginal_current(node):
            self._guarded(lambda: self._demand(node))
        record = self._marginals[node]
        return Marginal(node, self._tree.partition_of(node), record.mass)

    def _demand(self, node: str) -> None:
        for k in self._inbound(node):
            self._ensure_message(k, node)
        if not self._marginal_current(node):
            self._fire_rule2(node)

    def _ensure_message(self, j: str, i: str) -> None:
        for k in self._inbound(j, excluding=i):
            self._ensure_message(k, j)
        if not self._message_current(j, i):
            self.compute_message(j, i)

    def all_marginals(self) -> dict[str, Marginal]:
        return {node: self.marginal(node) for node in self._tree.node_ids}

    # -- propagation ---------------------------------------------------------

    def propagate_batch(self) -> FiringLog:
        """Run the two rules to quiescence with a deterministic schedule.

        Each sweep fires every enabled Rule-1 instance in canonical
        directed-edge order, then every enabled Rule-2 instance in node
        order, until nothing is enabled.  Returns the events fired by this
        call.  On total conflict the run aborts, the engine state rolls
        back, and the error reports where the conflict surfaced.
        """

        def schedule() -> bool:
            fired = False
            for j, i in self._tree.directed_edges():
                if self._rule1_enabled(j, i):
                    self.compute_message(j, i)
                    fired = True
            for node in self._tree.node_ids:
                if self._rule2_enabled(node):
                    self._fire_rule2(node)
                    fired = True
            return fired

        return self._run_to_quiescence(schedule)

    def propagate_concurrent(self, schedule_seed: int = 0) -> FiringLog:
        """Run to quiescence with randomized node-processor interleaving.

        Simulates one processor per node that acts as soon as its inputs
        are available, communicating only through the directed-edge
        message slots.  ``schedule_seed`` drives the interleaving; every
        seed reaches the same quiescent state, and marginals match
        :meth:`propagate_batch` because each processor combines its inputs
        in the same canonical order.
        """
        rng = random.Random(schedule_seed)

        def schedule() -> bool:
            actions: list[tuple[int, str, str | None]] = []
            for j, i in self._tree.directed_edges():
                if self._rule1_enabled(j, i):
                    actions.append((1, j, i))
            for node in self._tree.node_ids:
                if self._rule2_enabled(node):
                    actions.append((2, node, None))
            if not actions:
                return False
            rule, a, b = rng.choice(actions)
            if rule == 1:
                self.compute_message(a, b)
            else:
                self._fire_rule2(a)
            return True

        return self._run_to_quiescence(schedule)

    def _run_to_quiescence(self, step) -> FiringLog:
        start = len(self._log)

        def run() -> None:
            while step():
                pass

        self._guarded(run)
        self._has_run = True
        return tuple(self._log[start:])

    def _guarded(self, action) -> None:
        """Run ``action``; on total conflict, roll back all derived state."""
        saved = (
            dict(self._messages),
            dict(self._marginals),
            len(self._log),
            self._clock,
            self._has_run,
        )
        try:
            action()
        except TotalConflict:
            messages, marginals, log_len, clock, has_run = saved
            self._messages = messages
            self._marginals = marginals
            del self._log[log_len:]
            self._clock = clock
            self._has_run = has_run
            raise

    # -- test hooks ----------------------------------------------------------

    def _corrupt_message(self, j: str, i: str, mass: MassFunction) -> None:
        """Test hook: overwrite a stored message without touching its stamps.

        Records derived from the tampered message are dropped so the next
        propagation recomputes them from the corrupted value; the message
        itself still looks current and is never healed.  Used to verify
        that global cross-checks detect a broken engine.
        """
        target = (j, i)
        record = self._messages[target]
        self._messages[target] = replace(record, mass=mass)

        def depends_on(edge: tuple[str, str]) -> bool:
            if edge == target:
                return True
            ej, ei = edge
            return any(depends_on((k, ej)) for k in self._inbound(ej, excluding=ei))

        for edge in list(self._messages):
            if edge != target and depends_on(edge):
                del self._messages[edge]
        for node in list(self._marginals):
            if any(depends_on((k, node)) for k in self._inbound(node)):
                del self._marginals[node]


def new_engine(tree: MarkovTree, *, validate: bool = True) -> Engine:
    """Engine over a tree: all-vacuous evidence, no messages, no marginals.

    With ``validate=True`` (the default) the tree must pass (or have
    passed) the qualitative Markov check; ``validate=False`` trusts the
    caller's model.
    """
    return Engine(tree, validate=validate)
