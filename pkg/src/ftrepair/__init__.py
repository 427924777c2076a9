"""Repair and verification of fault tolerance for finite transition systems."""

from .core import (
    Model,
    NotPossible,
    Predicate,
    Relation,
    Repaired,
    RepairOutcome,
    StateCapExceeded,
    StateSpace,
    UsageError,
    augment_selfloops,
    image,
    is_closed,
    preimage,
    project,
)
from .dsl import ModelSpec, ParseError, elaborate, load_model, parse_model, pretty_print
from .fault_tolerance import (
    add_failsafe,
    add_masking,
    add_nonmasking,
    ensure_closure,
    remove_deadlock,
    verification_model,
)
from .oracle import brute_force_repair_exists, c1_trace_oracle
from .semantics import (
    Verdict,
    build_product,
    check_C1,
    format_trace,
    replay_trace,
    verify_failsafe,
    verify_leadsto,
    verify_masking,
    verify_stabilization,
)
from .stabilize import add_stabilization, add_stabilization_general, add_stabilization_k2
from .transforms import (
    consecutive_env_transform,
    eventually_fair_transform,
    strict_invariant_mode,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
