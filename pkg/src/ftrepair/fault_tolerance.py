"""Repair algorithms that add failsafe / masking / nonmasking tolerance.

The common scheme: identify states that are doomed (a fault or an
uncontrollable environment step can force a bad transition from them),
remove them and every transition that reaches them, shrink the invariant
until the remainder is closed and deadlock free, and give the program a
free hand outside the new invariant except on forbidden transitions.
"""
from __future__ import annotations

import dataclasses

from .core import (
    Model,
    NotPossible,
    Predicate,
    Relation,
    Repaired,
    RepairOutcome,
    UsageError,
    augment_selfloops,
    project,
    validate_ft_input,
)


def remove_deadlock(pred: Predicate, prog: Relation, env: Relation) -> Predicate:
    """Shrink ``pred`` until every remaining state has a program or
    environment successor inside it and no environment edge leaving it."""
    cur = pred
    while True:
        alive = cur & (prog.preimage(cur) | env.preimage(cur))
        alive = alive - env.preimage(~alive)
        if alive == cur:
            return cur
        cur = alive


def ensure_closure(rel: Relation, pred: Predicate) -> Relation:
    """Drop the pairs of ``rel`` that leave ``pred``."""
    return rel - rel.between(pred, ~pred)


def _strip_selfloops(model: Model, repaired: Relation, inv: Predicate,
                     injected: Predicate) -> tuple[Relation, Predicate]:
    """Remove the synthetic self-loops added for deadlocked invariant
    states, except where the loop is the only thing keeping its state
    alive inside the new invariant."""
    retained = []
    for s in injected:
        if (s, s) not in repaired:
            continue
        if s in inv:
            others = (
                t
                for t in set(repaired.successors(s)) | set(model.delta_e.successors(s))
                if t != s and t in inv
            )
            if next(others, None) is None:
                retained.append(s)
                continue
        repaired = repaired - Relation.from_pairs(model.space, [(s, s)])
    return repaired, Predicate.from_ids(model.space, retained)


def verification_model(model: Model, outcome: RepairOutcome) -> Model:
    """The model against which a repair should be verified: the original
    one, plus any synthetic self-loops that had to be kept."""
    if isinstance(outcome, Repaired):
        kept = outcome.stats.get("retained_selfloops", ())
        if kept:
            loops = Relation.from_pairs(model.space, [(s, s) for s in kept])
            return dataclasses.replace(model, delta_p=model.delta_p | loops)
    return model


def _doomed_fixpoint(model: Model, forced_bad: Predicate, entered_bad: Predicate,
                     escape_rel_for: "callable") -> tuple[Predicate, Predicate, Relation]:
    """Grow the sets of doomed states.

    ``forced_bad``: doomed no matter how the state was entered.
    ``entered_bad``: doomed when reached by a program or fault step (the
    environment is then free to act immediately).
    ``escape_rel_for(forbidden)``: the transitions the program could still
    use to escape, given the current forbidden set.
    """
    space = model.space
    full = Predicate.full(space)
    bad_env_sources = (model.delta_e & model.delta_b).preimage(full)
    doomed = forced_bad
    doomed_entry = entered_bad
    while True:
        forbidden = (model.delta_b | model.delta_r) | Relation.into(space, doomed_entry)
        trigger = model.delta_e.preimage(doomed) | bad_env_sources
        stuck = ~escape_rel_for(forbidden).has_out()
        grown = doomed | model.faults.preimage(doomed_entry) | (trigger & stuck)
        grown_entry = doomed_entry | grown | model.delta_e.preimage(grown)
        if grown == doomed and grown_entry == doomed_entry:
            return doomed, doomed_entry, forbidden
        doomed, doomed_entry = grown, grown_entry


def _prune_invariant(model: Model, repaired: Relation, inv: Predicate,
                     ) -> tuple[Predicate, Relation, bool]:
    """Shrink the invariant until no state freshly blocks the program where
    the original program was enabled next to an environment edge."""
    de = model.delta_e
    has_e = de.has_out()
    has_p = model.delta_p.has_out()
    while True:
        if not inv:
            return inv, repaired, False
        repaired = ensure_closure(repaired, inv)
        newly_blocked = has_e & has_p & ~repaired.has_out()
        exposed = de.preimage(newly_blocked)
        shrunk = remove_deadlock(inv - exposed, repaired, de)
        if shrunk == inv:
            return inv, repaired, True
        inv = shrunk


def add_failsafe(model: Model, sound_only: bool = False) -> RepairOutcome:
    """Repair so that no computation in the presence of faults ever takes a
    bad or restricted transition."""
    if model.k != 2 and not sound_only:
        raise UsageError("failsafe repair is complete only for k = 2; "
                         "pass sound_only to run it anyway")
    validate_ft_input(model)
    work, injected = augment_selfloops(model)
    space = work.space
    S = work.invariant
    forced = (work.faults & work.delta_b).preimage(Predicate.full(space))
    entered = forced | (work.delta_e & work.delta_b).preimage(Predicate.full(space))
    doomed, doomed_entry, forbidden = _doomed_fixpoint(
        work, forced, entered, lambda f: f.complement()
    )
    repaired = project(work.delta_p, S) - forbidden
    inv = remove_deadlock(S - doomed_entry, repaired, work.delta_e)
    inv, repaired, ok = _prune_invariant(work, repaired, inv)
    stats = {
        "doomed": len(doomed),
        "doomed_entry": len(doomed_entry),
        "invariant_prime": len(inv),
    }
    if not ok:
        return NotPossible(stats)
    repaired = (repaired | Relation.from_sources(space, ~inv)) - forbidden
    repaired, kept = _strip_selfloops(work, repaired, inv, injected)
    stats["retained_selfloops"] = kept.members
    return Repaired(repaired, inv, stats)


def add_masking(model: Model, sound_only: bool = False) -> RepairOutcome:
    """Repair so that faults are both masked (no bad transitions) and
    recovered from (computations return to the new invariant)."""
    if model.k != 2 and not sound_only:
        raise UsageError("masking repair is complete only for k = 2; "
                         "pass sound_only to run it anyway")
    validate_ft_input(model)
    work, injected = augment_selfloops(model)
    space = work.space
    full = Predicate.full(space)
    S = work.invariant
    de = work.delta_e
    blocked = work.delta_b | work.delta_r
    inv = S
    while True:
        snapshot = inv
        blocked_before = len(blocked)
        # Grow the recoverable region from the current invariant.  Recovery
        # transitions are rebuilt from scratch each round (the invariant may
        # have shrunk, and earlier rounds may have outlawed transitions that
        # reach doomed states) and frozen per state at its first repairable
        # moment, so no recovery ever targets a state whose own recovery
        # circularly depends on it.
        allowed = blocked.complement()
        repaired = project(work.delta_p, inv)
        region = inv
        processed = Predicate.empty(space)
        while True:
            frontier = allowed.preimage(region) - region
            fresh = frontier - processed
            repaired = repaired | allowed.between(fresh, region)
            processed = processed | fresh
            both = region | frontier
            grown = region | (
                (~region - de.preimage(~both)) & (de.preimage(both) | frontier)
            )
            if grown == region:
                break
            region = grown
        forced = ~(region | frontier) | (work.faults & work.delta_b).preimage(full)
        entered = ~region | forced | (work.delta_e & work.delta_b).preimage(full)
        doomed, doomed_entry, forbidden = _doomed_fixpoint(
            work, forced, entered, lambda f: repaired - f
        )
        repaired = repaired - forbidden
        blocked = blocked | forbidden
        inv = remove_deadlock(snapshot - doomed_entry, repaired, de)
        inv, repaired, ok = _prune_invariant(work, repaired, inv)
        if not ok:
            return NotPossible({
                "doomed": len(doomed),
                "doomed_entry": len(doomed_entry),
            })
        if inv == snapshot and len(blocked) == blocked_before:
            break
    stats = {
        "doomed": len(doomed),
        "doomed_entry": len(doomed_entry),
        "invariant_prime": len(inv),
    }
    repaired, kept = _strip_selfloops(work, repaired, inv, injected)
    stats["retained_selfloops"] = kept.members
    return Repaired(repaired, inv, stats)


def add_nonmasking(model: Model, sound_only: bool = False) -> RepairOutcome:
    """Recovery without masking: drop the bad-transition obligation (the
    restricted set still applies) and run the masking repair."""
    relaxed = dataclasses.replace(model, delta_b=Relation.empty(model.space))
    return add_masking(relaxed, sound_only=sound_only)
