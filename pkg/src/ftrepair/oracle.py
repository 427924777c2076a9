"""Independent oracles used to cross-check the repair algorithms.

``brute_force_repair_exists`` decides repairability by enumerating candidate
programs outright and running the semantic verifiers on each; it is
exponential and capped, but shares no logic with the repair algorithms.

``c1_trace_oracle`` decides behaviour containment by walking every
reachable window-credit configuration of the candidate program and checking
each step is legal for the original program; it shares no logic with the
structural containment test.
"""
from __future__ import annotations

import dataclasses
from itertools import combinations

from .core import Model, Predicate, Relation, UsageError, project
from .semantics import verify_failsafe, verify_masking, verify_stabilization

MODES = ("stabilize", "failsafe", "masking", "nonmasking")


def _subsets_desc(items):
    """All subsets, largest bit patterns first (permissive candidates tend
    to succeed, so this finds witnesses early)."""
    for bits in range((1 << len(items)) - 1, -1, -1):
        yield [items[i] for i in range(len(items)) if bits >> i & 1]


def brute_force_repair_exists(model: Model, mode: str, cap: int = 6) -> bool:
    """Exhaustively decide whether any repaired program exists."""
    if mode not in MODES:
        raise UsageError(f"unknown mode {mode!r}")
    if mode == "nonmasking":
        relaxed = dataclasses.replace(model, delta_b=Relation.empty(model.space))
        return brute_force_repair_exists(relaxed, "masking", cap)
    n = model.space.count
    if n > cap:
        raise UsageError(f"brute force refused: {n} states exceeds cap {cap}")
    space = model.space
    S = model.invariant
    if mode == "stabilize":
        base = project(model.delta_p, S)
        free = [
            (i, j)
            for i in range(n)
            if i not in S
            for j in range(n)
            if (i, j) not in model.delta_b
        ]
        for extra in _subsets_desc(free):
            cand = base | Relation.from_pairs(space, extra)
            if verify_stabilization(model, cand).passed:
                return True
        return False

    verifier = verify_failsafe if mode == "failsafe" else verify_masking
    banned = model.delta_b | model.delta_r
    members = S.members
    for size in range(len(members), 0, -1):
        for chosen in combinations(members, size):
            inv = Predicate.from_ids(space, chosen)
            base = project(model.delta_p, inv)
            free = [
                (i, j)
                for i in range(n)
                if i not in inv
                for j in range(n)
                if (i, j) not in banned
            ]
            for extra in _subsets_desc(free):
                cand = base | Relation.from_pairs(space, extra)
                if verifier(model, cand, inv).passed:
                    return True
    return False


def c1_trace_oracle(model: Model, program_prime: Relation, invariant_prime: Predicate) -> bool:
    """Path-exploration counterpart of the structural containment test.

    Walks every (state, credit) configuration the candidate program can
    reach from its invariant and demands that each step it can take is a
    same-kind legal step of the original program, that no configuration
    escapes the new invariant, and that no fresh deadlock appears.
    """
    k = model.k
    dp = model.delta_p.adjacency()
    de = model.delta_e.adjacency()
    pp = program_prime.adjacency()
    if not invariant_prime <= model.invariant:
        return False
    seen = set()
    stack = [(s, 0) for s in invariant_prime]
    seen.update(stack)
    while stack:
        s, c = stack.pop()
        if s not in invariant_prime:
            return False
        down = c - 1 if c else 0
        moved = False
        for t in pp[s]:
            if (s, t) not in model.delta_p:
                return False
            moved = True
            if (t, down) not in seen:
                seen.add((t, down))
                stack.append((t, down))
        if c == 0 or not pp[s]:
            for t in de[s]:
                if c != 0 and dp[s]:
                    # the original program would have been forced instead
                    return False
                moved = True
                if (t, k - 1) not in seen:
                    seen.add((t, k - 1))
                    stack.append((t, k - 1))
        if not moved and dp[s]:
            return False  # fresh deadlock
    return True
