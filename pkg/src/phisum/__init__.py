"""Pathsums of acyclic weighted automata with failure transitions."""
from .aggregator import (
    AGGREGATORS,
    DivisionRingAggregator,
    FenwickAggregator,
    RingAggregator,
    aggregator_for,
)
from .automaton import (
    Automaton,
    FailureForest,
    SparsityStats,
    build_failure_forest,
    compute_stats,
    failure_expand,
    validate,
)
from .errors import (
    CapabilityError,
    CycleError,
    DuplicateFailureArc,
    ParseError,
    PathBudgetExceeded,
    PhisumError,
    UnderflowError,
    ValidationError,
)
from .io import format_automaton, load_automaton, parse_automaton
from .pathsum import (
    ALGORITHMS,
    PathsumReport,
    brute_force_pathsum,
    expand_backward,
    general_backward,
    memoization_backward,
    pathsum,
    ring_backward,
)
from .semiring import SEMIRINGS, DivisionRing, Ring, Semiring, get_semiring
from .splitting import SplitPlan, SplitPolicy, optimal_static_split
from .toposort import StateOrder, greedy_compatible_order, is_compatible, kahn_reverse_topo

__version__ = "0.1.0"

__all__ = [
    "AGGREGATORS",
    "ALGORITHMS",
    "Automaton",
    "CapabilityError",
    "CycleError",
    "DivisionRing",
    "DivisionRingAggregator",
    "DuplicateFailureArc",
    "FailureForest",
    "FenwickAggregator",
    "ParseError",
    "PathBudgetExceeded",
    "PathsumReport",
    "PhisumError",
    "Ring",
    "RingAggregator",
    "SEMIRINGS",
    "Semiring",
    "SparsityStats",
    "SplitPlan",
    "SplitPolicy",
    "StateOrder",
    "UnderflowError",
    "ValidationError",
    "aggregator_for",
    "brute_force_pathsum",
    "build_failure_forest",
    "compute_stats",
    "expand_backward",
    "failure_expand",
    "format_automaton",
    "general_backward",
    "get_semiring",
    "greedy_compatible_order",
    "is_compatible",
    "kahn_reverse_topo",
    "load_automaton",
    "memoization_backward",
    "optimal_static_split",
    "parse_automaton",
    "pathsum",
    "ring_backward",
    "validate",
]
