"""Repair algorithms that add convergence to an invariant.

Both algorithms grow a recoverable region outward from the invariant.  A
state joins the region either because an added program transition takes it
there (and the window discipline forces that transition to fire before the
environment can interfere again), or because every environment move from
it lands in the region.

The recovery transitions a state receives are frozen the first time the
state becomes repairable: they always target the region as it was at that
moment.  Allowing later, larger targets would admit circular recoveries
where two states outside the invariant bounce a computation between each
other forever, each justified by the other's membership.
"""
from __future__ import annotations

import numpy as np

from .core import (
    Model,
    NotPossible,
    Predicate,
    Relation,
    Repaired,
    RepairOutcome,
    UsageError,
    project,
)

_INF = np.iinfo(np.int64).max // 2


def add_stabilization_k2(model: Model) -> RepairOutcome:
    """Convergence repair for window width 2.

    Keeps the in-invariant program intact, gives every newly repairable
    state the recovery transitions that land in the current region, and
    grows the region while the environment cannot drag a state outside it.
    """
    if model.k != 2:
        raise UsageError("this repair is specific to k = 2; use the general one")
    S = model.invariant
    de = model.delta_e
    allowed = model.delta_b.complement()
    repaired = project(model.delta_p, S)
    if repaired & model.delta_b:
        # the in-invariant program is untouchable, and every state is a
        # possible start, so a forbidden transition inside the invariant
        # can never be avoided
        return NotPossible({"region": 0, "iterations": 0})
    region = S
    processed = Predicate.empty(model.space)
    iterations = 0
    while True:
        iterations += 1
        frontier = allowed.preimage(region) - region
        fresh = frontier - processed
        repaired = repaired | allowed.between(fresh, region)
        processed = processed | fresh
        both = region | frontier
        dragged_out = de.preimage(~both)
        pulled_in = de.preimage(both)
        grown = region | ((~region - dragged_out) & (pulled_in | frontier))
        if grown == region:
            break
        region = grown
    stats = {"region": len(region), "iterations": iterations}
    if len(region) != model.space.count:
        return NotPossible(stats)
    return Repaired(repaired, S, stats)


def add_stabilization_general(model: Model) -> RepairOutcome:
    """Convergence repair for any window width ``k > 1``.

    Ranks states by the length of a chain of added program transitions
    back to the recoverable region; a state with rank below ``k`` is
    brought home by the forced program steps that follow any environment
    move, so states whose environment moves all land on ranks below ``k``
    join the region.

    Chains are committed the moment they justify a region membership and
    never rewired afterwards: a later, shorter chain through states that
    joined the region in the meantime could route a computation back into
    the very states whose membership depends on the chain.
    """
    n = model.space.count
    k = model.k
    S = model.invariant
    if project(model.delta_p, S) & model.delta_b:
        # see add_stabilization_k2: an in-invariant forbidden transition
        # cannot be repaired away
        return NotPossible({"region": 0, "rounds": 0})
    safe = model.delta_b.complement().adjacency()
    env = model.delta_e.adjacency()

    in_region = S.mask.copy()
    # -2: free, -1: committed without a program transition, >= 0: committed
    # single recovery transition (chains only run through committed states).
    ptr = np.full(n, -2, dtype=np.int64)

    def chain_lengths() -> np.ndarray:
        length = np.where(in_region, 0, _INF).astype(np.int64)
        for start in range(n):
            trail = []
            s = start
            while length[s] == _INF and ptr[s] >= 0:
                trail.append(s)
                s = int(ptr[s])
            base = length[s]
            for hop, t in enumerate(reversed(trail), start=1):
                length[t] = base + hop if base < _INF else _INF
        return length

    rounds = 0
    while True:
        rounds += 1
        length = chain_lengths()
        rank = length.copy()
        nxt = np.full(n, -1, dtype=np.int64)
        while True:
            changed = False
            for s in range(n):
                if in_region[s] or ptr[s] != -2:
                    continue
                for t in safe[s]:
                    via = length[t] if ptr[t] != -2 or in_region[t] else rank[t]
                    if via + 1 < rank[s]:
                        rank[s] = via + 1
                        nxt[s] = t
                        changed = True
            if not changed:
                break
        joiners = [
            s
            for s in range(n)
            if not in_region[s]
            and all(rank[t] < k for t in env[s])
            and (env[s] or rank[s] == 1)
        ]
        progress = False
        for s in joiners:
            for t in env[s]:
                w = t
                while not in_region[w] and ptr[w] == -2:
                    ptr[w] = nxt[w]
                    w = int(ptr[w])
            # a state whose committed recovery chain still runs through
            # states outside the region must wait for them: joining now
            # would let its forced chain re-enter states whose membership
            # depends on it
            if ptr[s] != -2 and not (ptr[s] >= 0 and in_region[ptr[s]]):
                continue
            if ptr[s] == -2:
                ptr[s] = nxt[s] if rank[s] == 1 else -1
            in_region[s] = True
            progress = True
        if not progress:
            break

    stats = {"region": int(in_region.sum()), "rounds": rounds}
    if not in_region.all():
        return NotPossible(stats)
    extra = [(s, int(ptr[s])) for s in range(n) if ptr[s] >= 0]
    repaired = project(model.delta_p, S) | Relation.from_pairs(model.space, extra)
    return Repaired(repaired, S, stats)


def add_stabilization(model: Model) -> RepairOutcome:
    """Dispatch on the window width."""
    if model.k == 2:
        return add_stabilization_k2(model)
    return add_stabilization_general(model)
