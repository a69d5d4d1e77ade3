"""Brute-force global combination on the base frame, for verifying the
local-computation engine and the coarsening identities on small instances.

The engine computes marginals by message passing; this module computes the
same marginals the expensive way: extend every node's evidence to the base
frame, combine everything globally, and coarsen back to each node's
partition.  Agreement between the two routes is the core correctness
check.  Frame sizes are hard-capped; this is a verification tool, not the
production path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .beliefs import (
    EPS_CMP,
    MassFunction,
    coarsen,
    combine_many,
    dempster_combine,
    is_carried_by,
    mass_deviation,
    project,
    vacuous,
    vacuous_extend,
)
from .engine import new_engine
from .errors import FrameTooLarge, HypothesisNotSatisfied, TotalConflict
from .frames import Partition, meet, qualitatively_cond_independent
from .trees import MarkovTree

#: Global combination enumerates focal products on the base frame.
ORACLE_MAX_FRAME = 16

Evidence = Mapping[str, Sequence[MassFunction]]


@dataclass(frozen=True)
class GlobalResult:
    """Product of one global combination."""

    global_mass: MassFunction
    coarsenings: dict[str, MassFunction]
    conflict_mass: float


def _node_belief(tree: MarkovTree, evidence: Evidence, node: str) -> tuple[MassFunction, float]:
    """Combined local evidence on the node's coarse frame, plus its conflict."""
    items = list(evidence.get(node, ()))
    if not items:
        return vacuous(tree.partition_of(node).coarse_frame), 0.0
    try:
        report = combine_many(items)
    except TotalConflict as err:
        raise TotalConflict(conflict=err.conflict, location=f"node {node}") from None
    return report.result, report.conflict_mass


def global_combine(
    tree: MarkovTree,
    evidence: Evidence,
    *,
    max_frame: int = ORACLE_MAX_FRAME,
    combine_on_meet: bool = False,
) -> GlobalResult:
    """Combine all evidence in one place and coarsen to every node.

    Each node's evidence items are combined on its coarse frame, vacuously
    extended to the base frame, combined globally, and coarsened back to
    every node's partition.  With ``combine_on_meet=True`` the global
    combination runs on the meet of all node partitions instead of the
    base frame (the results agree; both routes exist for cross-checking).

    The reported conflict aggregates the per-node and global combination
    steps multiplicatively.
    """
    frame = tree.frame
    if frame.size > max_frame:
        raise FrameTooLarge(
            f"global combination on {frame.size} elements exceeds the cap of {max_frame}"
        )
    surviving = 1.0
    extended: list[MassFunction] = []
    for node in tree.node_ids:
        local, conflict = _node_belief(tree, evidence, node)
        surviving *= 1.0 - conflict
        extended.append(vacuous_extend(local, tree.partition_of(node)))
    if combine_on_meet:
        base = meet([tree.partition_of(n) for n in tree.node_ids])
        inputs = [coarsen(m, base) for m in extended]
    else:
        base = None
        inputs = extended
    try:
        report = combine_many(inputs)
    except TotalConflict as err:
        raise TotalConflict(
            conflict=1.0 - surviving * (1.0 - err.conflict), location="global"
        ) from None
    surviving *= 1.0 - report.conflict_mass
    combined = report.result
    if base is not None:
        coarsenings = {
            node: project(combined, base, tree.partition_of(node))
            for node in tree.node_ids
        }
        global_mass = vacuous_extend(combined, base)
    else:
        coarsenings = {
            node: coarsen(combined, tree.partition_of(node))
            for node in tree.node_ids
        }
        global_mass = combined
    return GlobalResult(global_mass, coarsenings, 1.0 - surviving)


@dataclass(frozen=True)
class AgreementReport:
    """Node-by-node deviation between engine marginals and the global route."""

    deviations: dict[str, float]
    tol: float

    @property
    def max_deviation(self) -> float:
        return max(self.deviations.values(), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tol

    def to_json(self) -> dict:
        return {
            "pass": self.passed,
            "tol": self.tol,
            "deviations": dict(sorted(self.deviations.items())),
            "max_deviation": self.max_deviation,
        }


def check_marginals_against_global(
    tree: MarkovTree,
    evidence: Evidence,
    tol: float = EPS_CMP,
    *,
    engine=None,
    max_frame: int = ORACLE_MAX_FRAME,
) -> AgreementReport:
    """Compare engine marginals with global-combination coarsenings.

    Builds a fresh engine from ``evidence`` unless one is supplied (a
    supplied engine is propagated as-is, so tampered state stays visible).
    The tree must be Markov-valid for the two routes to agree.
    """
    if engine is None:
        engine = new_engine(tree)
        for node, items in evidence.items():
            for item in items:
                engine.enter_evidence(node, item)
    engine.propagate_batch()
    reference = global_combine(tree, evidence, max_frame=max_frame)
    deviations = {
        node: mass_deviation(engine.marginal(node).mass, reference.coarsenings[node])
        for node in tree.node_ids
    }
    return AgreementReport(deviations, tol)


@dataclass(frozen=True)
class IdentityReport:
    """Outcome of one coarsening identity check."""

    deviation: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tol

    def to_json(self) -> dict:
        return {"pass": self.passed, "tol": self.tol, "deviation": self.deviation}


def _require_gate(p1: Partition, p2: Partition, given: Partition) -> None:
    if not qualitatively_cond_independent([p1, p2], given):
        raise HypothesisNotSatisfied(
            "the partitions are not qualitatively conditionally independent "
            "given the coarsening target"
        )


def check_coarsening_distributes(
    p1: Partition,
    p2: Partition,
    given: Partition,
    bel1: MassFunction,
    bel2: MassFunction,
    tol: float = EPS_CMP,
) -> IdentityReport:
    """Coarsening a combination vs. combining the coarsenings.

    For ``bel1`` carried by ``p1`` and ``bel2`` carried by ``p2``, with the
    two partitions qualitatively conditionally independent given the
    target, the two routes agree.  Raises
    :class:`HypothesisNotSatisfied` when a precondition fails, so callers
    can skip rather than fail such instances.
    """
    _require_gate(p1, p2, given)
    if not is_carried_by(bel1, p1) or not is_carried_by(bel2, p2):
        raise HypothesisNotSatisfied("a mass function is not carried by its partition")
    try:
        joint = dempster_combine(bel1, bel2).result
        recombined = dempster_combine(coarsen(bel1, given), coarsen(bel2, given)).result
    except TotalConflict:
        raise HypothesisNotSatisfied(
            "the operands are totally conflicting; the combination does not exist"
        ) from None
    return IdentityReport(mass_deviation(coarsen(joint, given), recombined), tol)


def check_stepwise_projection(
    p1: Partition,
    p2: Partition,
    given: Partition,
    bel2: MassFunction,
    tol: float = EPS_CMP,
) -> IdentityReport:
    """Coarsening directly vs. coarsening through an intermediate partition.

    For ``bel2`` carried by ``p2`` with ``p1`` and ``p2`` qualitatively
    conditionally independent given the intermediate partition, coarsening
    to ``p1`` equals coarsening to the intermediate partition first and
    projecting on.
    """
    _require_gate(p1, p2, given)
    if not is_carried_by(bel2, p2):
        raise HypothesisNotSatisfied("the mass function is not carried by its partition")
    direct = coarsen(bel2, p1)
    stepwise = project(coarsen(bel2, given), given, p1)
    return IdentityReport(mass_deviation(direct, stepwise), tol)
