"""Input transformations that extend what the repair algorithms cover."""
from __future__ import annotations

import dataclasses

from .core import Model, NotPossible, Repaired, RepairOutcome, UsageError


def eventually_fair_transform(model: Model) -> Model:
    """Model an environment that is only eventually fair by treating every
    environment transition as a fault as well: faults occur finitely often,
    so after some point the environment obeys the window discipline.
    Intended for the fault-tolerance repairs; convergence-only repair needs
    no change."""
    return dataclasses.replace(model, faults=model.faults | model.delta_e)


def consecutive_env_transform(model: Model) -> Model:
    """Allow bursts of consecutive environment steps by closing the
    environment relation transitively."""
    return dataclasses.replace(model, delta_e=model.delta_e.transitive_closure())


def strict_invariant_mode(model: Model, outcome: RepairOutcome) -> RepairOutcome:
    """Demand that a repair keep the whole original invariant."""
    if isinstance(outcome, Repaired) and outcome.invariant_prime != model.invariant:
        return NotPossible(dict(outcome.stats))
    return outcome
