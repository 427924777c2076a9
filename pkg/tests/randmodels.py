"""Seeded random model generators shared by the test suites."""
from __future__ import annotations

import random

from ftrepair.core import Model, Predicate, Relation, StateSpace, project


def _random_relation(rng: random.Random, n: int, density: float) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(n) if rng.random() < density]


def random_model(
    rng: random.Random,
    n_choices=(3, 4, 5, 6, 7, 8),
    k: int = 2,
    ft_input: bool = False,
    inv_max: int | None = None,
) -> Model:
    """A random repair instance.  With ``ft_input`` the result satisfies the
    fault-tolerance preconditions: nonempty invariant, closed under program
    plus environment, program disjoint from the restricted set, and no bad
    transition inside the invariant behaviour."""
    n = rng.choice(list(n_choices))
    space = StateSpace(n)
    inv_size = rng.randint(1, inv_max or max(1, n // 2))
    inv = Predicate.from_ids(space, rng.sample(range(n), min(inv_size, n)))

    dp = Relation.from_pairs(space, _random_relation(rng, n, rng.uniform(0.1, 0.4)))
    de = Relation.from_pairs(space, _random_relation(rng, n, rng.uniform(0.05, 0.3)))
    db = Relation.from_pairs(space, _random_relation(rng, n, rng.uniform(0.2, 0.5)))
    dr = Relation.from_pairs(space, _random_relation(rng, n, rng.uniform(0.2, 0.5)))
    fl = Relation.from_pairs(space, _random_relation(rng, n, rng.uniform(0.05, 0.25)))

    if ft_input:
        # close the invariant: redirect escaping program/environment pairs
        dp = dp - dp.between(inv, ~inv)
        de = de - de.between(inv, ~inv)
        # every invariant state keeps an inside move (fresh deadlocks are
        # exercised separately through the self-loop bookkeeping tests)
        loops = [(s, s) for s in inv if not (
            set(dp.successors(s)) & set(inv.members)
            or set(de.successors(s)) & set(inv.members))]
        dp = dp | Relation.from_pairs(space, loops)
        dr = dr - dp
        # fault-free behaviour from the invariant must respect safety
        db = db - project(dp | de, inv)

    return Model(space, dp, de, db, dr, fl, inv, k)
