"""Exception hierarchy for qmtree.

Every library-raised error derives from :class:`QmtError` so callers can
catch the whole family with one handler (the CLI maps them to exit codes).
"""

from __future__ import annotations


class QmtError(Exception):
    """Base class for all qmtree errors."""


# -- frame / subset / partition ----------------------------------------------

class DuplicateLabel(QmtError):
    """A frame was given the same element label twice."""


class FrameTooLarge(QmtError):
    """A frame (or an operation's frame cap) exceeds the supported size."""


class FrameMismatch(QmtError):
    """Two values that must share a frame live on different frames."""


class EmptySubset(QmtError):
    """An operation requires a nonempty subset."""


class EmptyBlock(QmtError):
    """A partition block is empty."""


class OverlappingBlocks(QmtError):
    """Two partition blocks intersect."""


class IncompleteCover(QmtError):
    """Partition blocks do not cover the whole frame."""


# -- mass / belief functions -------------------------------------------------

class InvalidMassFunction(QmtError):
    """Focal sets or masses violate the mass-function invariants."""


class NotABeliefFunction(QmtError):
    """A belief table has no nonnegative mass decomposition."""


class TotalConflict(QmtError):
    """All joint focal intersections are empty; the combination is undefined.

    ``conflict`` holds the raw conflict mass, ``location`` an optional
    human-readable description of the node or edge where it was detected.
    """

    def __init__(self, message: str = "total conflict", *,
                 conflict: float = 1.0, location: str | None = None):
        if location is not None:
            message = f"{message} (at {location})"
        super().__init__(message)
        self.conflict = conflict
        self.location = location


# -- networks and trees ------------------------------------------------------

class UnknownNode(QmtError):
    """An edge or query references a node id that does not exist."""


class SelfLoop(QmtError):
    """An edge joins a node to itself."""


class DuplicateEdge(QmtError):
    """The same unordered edge appears twice."""


class OverlappingSets(QmtError):
    """Node sets that must be disjoint share a node."""


class NotATree(QmtError):
    """The network is not connected and acyclic."""


class NotAnEdge(QmtError):
    """The referenced node pair is not an edge of the tree."""


class InvalidTree(QmtError):
    """A propagation engine was given a tree that fails validation."""


# -- propagation -------------------------------------------------------------

class MissingInbound(QmtError):
    """A message or marginal was requested before its inputs are current."""


class NoRunYet(QmtError):
    """A firing trace was requested before any propagation has run."""


# -- verification ------------------------------------------------------------

class HypothesisNotSatisfied(QmtError):
    """A checked identity's precondition fails; the check is skipped."""


# -- serialization -----------------------------------------------------------

class ParseError(QmtError):
    """A model, evidence, or mass-function document is malformed."""
