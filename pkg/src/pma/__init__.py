"""Periodic message assignment on a shared link: models, schedulers and experiments."""

from .core import Instance, PartialAssignment, Trace, Violation, available_offsets, is_valid, load, trace_of, validate, windows
from .greedy import GreedyOutcome, first_fit, meta_offset
from .compact import bound_table, compact_fit, compact_k_tuples_solve, compact_pair_solve, find_compact_pair
from .reductions import (
    ReductionRecord,
    best_reference_remainder,
    buffer_to_multiple,
    buffer_to_reference,
    compact_pair_tau2_solve,
    normalize_period,
    pullback,
    to_unit_size,
)
from .sizeone import (
    PotentialState,
    greedy_potential,
    greedy_uniform,
    message_potential,
    success_probability,
    swap,
    swap_and_move,
)
from .exact import ExactResult, exact_solve, search_unsat

__all__ = [name for name in dir() if not name.startswith("_")]
