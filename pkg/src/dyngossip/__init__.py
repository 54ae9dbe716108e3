"""Dynamic gossip: execution, exhaustive analysis and theorem checking."""

from .classify import GraphClass, classify, skin
from .core import (
    Call,
    CallSequence,
    GossipError,
    GossipGraph,
    ImpossibleCall,
    Relation,
    apply_call,
    apply_sequence,
    experts,
    is_possible,
    local_history,
    make_initial,
)
from .explorer import (
    FairRunStats,
    SearchResult,
    TreeSolution,
    bottom_up_sequence,
    decide_success,
    enumerate_extension,
    min_success_length,
    random_fair_runs,
    shortest_successful_sequence,
    solve_tree,
)
from .protocol import (
    ConditionSyntaxError,
    ExecutionState,
    MemorySignature,
    NotPermitted,
    format_condition,
    named_protocol,
    parse_condition,
    permitted_calls,
    step,
    validate_sequence,
)
from .symmetry import canonical_form
from .verifier import (
    VerificationReport,
    builtin_graph,
    check_hierarchy,
    check_theorem,
    enumerate_initial_graphs,
)

__all__ = [name for name in dir() if not name.startswith("_")]
