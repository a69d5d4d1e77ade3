"""Belief-function inference on qualitative Markov trees.

Evidence enters as mass functions at tree nodes; the engine combines it
with Dempster's rule and moves it between neighboring partitions by
projection, using only node-local computations.  A brute-force global
combination is included for cross-checking on small frames.
"""

from ._backend import get_backend
from .beliefs import (
    EPS_CMP,
    EPS_CONFLICT,
    EPS_DROP,
    EPS_MASS,
    MOBIUS_MAX_FRAME,
    CombinationReport,
    MassFunction,
    approx_equal,
    associated_partition,
    belief_of,
    belief_table,
    coarsen,
    combine_many,
    dempster_combine,
    is_carried_by,
    mass_deviation,
    mass_from_belief,
    project,
    vacuous,
    vacuous_extend,
)
from .engine import Engine, FiringEvent, FiringLog, Marginal, new_engine
from .errors import (
    DuplicateEdge,
    DuplicateLabel,
    EmptyBlock,
    EmptySubset,
    FrameMismatch,
    FrameTooLarge,
    HypothesisNotSatisfied,
    IncompleteCover,
    InvalidMassFunction,
    InvalidTree,
    MissingInbound,
    NoRunYet,
    NotABeliefFunction,
    NotAnEdge,
    NotATree,
    OverlappingBlocks,
    OverlappingSets,
    ParseError,
    QmtError,
    SelfLoop,
    TotalConflict,
    UnknownNode,
)
from .frames import (
    MAX_FRAME_SIZE,
    BlockSet,
    Frame,
    Partition,
    SubsetMask,
    blocks_touching,
    is_coarser,
    is_strictly_coarser,
    make_frame,
    make_partition,
    meet,
    qualitatively_cond_independent,
    qualitatively_independent,
    singleton_partition,
    trivial_partition,
)
from .oracle import (
    ORACLE_MAX_FRAME,
    AgreementReport,
    GlobalResult,
    IdentityReport,
    check_coarsening_distributes,
    check_marginals_against_global,
    check_stepwise_projection,
    global_combine,
)
from .trees import (
    MarkovReport,
    MarkovTree,
    Network,
    as_tree,
    build_network,
    edge_kernel,
    is_qualitative_markov_network,
    is_tree,
    separates,
    subtree_components,
    validate_markov,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
