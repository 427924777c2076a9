"""Stabilization repair: the width-2 algorithm and the general one."""
import random

import pytest

from ftrepair.core import NotPossible, Predicate, Relation, Repaired, project
from ftrepair.oracle import brute_force_repair_exists
from ftrepair.semantics import verify_stabilization
from ftrepair.stabilize import (
    add_stabilization,
    add_stabilization_general,
    add_stabilization_k2,
)
from randmodels import random_model
from test_semantics import make


@pytest.mark.parametrize("repair", [add_stabilization_k2, add_stabilization_general])
def test_simple_chain_is_repaired(repair):
    m = make(4, dp=[(0, 0)], db=[(2, 0)])
    out = repair(m)
    assert isinstance(out, Repaired)
    assert verify_stabilization(m, out.delta_p_prime).passed
    # the program inside the invariant is untouched
    assert project(out.delta_p_prime, m.invariant) == project(m.delta_p, m.invariant)
    assert not (out.delta_p_prime & m.delta_b)


@pytest.mark.parametrize("repair", [add_stabilization_k2, add_stabilization_general])
def test_bad_transition_inside_invariant_is_fatal(repair):
    # the in-invariant program is kept verbatim and every state is a start
    # state, so a bad transition there cannot be repaired around
    m = make(3, dp=[(0, 0)], db=[(0, 0)])
    assert isinstance(repair(m), NotPossible)


@pytest.mark.parametrize("repair", [add_stabilization_k2, add_stabilization_general])
def test_fully_blocked_state_is_fatal(repair):
    m = make(3, dp=[(0, 0)], db=[(1, j) for j in range(3)])
    out = repair(m)
    assert isinstance(out, NotPossible)
    assert not brute_force_repair_exists(m, "stabilize")


def test_environment_kick_needs_wider_window():
    # the environment throws state 1 back out; with k = 2 it can do so every
    # window, with k = 3 the program strings two recovery steps together
    m = make(3, dp=[(0, 0)], de=[(1, 2)], db=[(2, 0)])
    assert isinstance(add_stabilization_k2(m), NotPossible)
    assert not brute_force_repair_exists(m, "stabilize")
    out = add_stabilization_general(m.with_k(3))
    assert isinstance(out, Repaired)
    assert verify_stabilization(m.with_k(3), out.delta_p_prime).passed


def test_repointing_trap():
    # the environment cycle 0 <-> 2 tempts the repair into certifying state
    # 2 through state 0 before 0 has a working exit of its own
    m = make(
        4,
        dp=[(3, 1), (3, 2)],
        de=[(0, 2), (2, 0), (3, 1)],
        db=[(2, 0), (2, 3)],
        inv=(3,),
    )
    out = add_stabilization_k2(m)
    assert isinstance(out, Repaired) == brute_force_repair_exists(m, "stabilize")
    if isinstance(out, Repaired):
        assert verify_stabilization(m, out.delta_p_prime).passed


def test_dispatcher_routes_on_k():
    m = make(4, dp=[(0, 0)], db=[(2, 0)])
    assert isinstance(add_stabilization(m), Repaired)
    assert isinstance(add_stabilization(m.with_k(3)), Repaired)
    assert "iterations" in add_stabilization(m).stats
    assert "rounds" in add_stabilization(m.with_k(3)).stats


def test_general_never_beats_the_complete_width2_algorithm():
    # at k = 2 the general algorithm is sound, so whenever it repairs, the
    # complete algorithm must too
    for i in range(150):
        rng = random.Random(40_000 + i)
        m = random_model(rng, (3, 6), 2, ft_input=False, inv_max=3)
        out = add_stabilization_general(m)
        if isinstance(out, Repaired):
            assert verify_stabilization(m, out.delta_p_prime).passed, i
            assert isinstance(add_stabilization_k2(m), Repaired), i


def test_stats_report_region_size():
    m = make(4, dp=[(0, 0)], db=[(2, 0)])
    out = add_stabilization_k2(m)
    assert out.stats["region"] == 4
