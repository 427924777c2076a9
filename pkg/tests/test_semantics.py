"""Window-product semantics and the property checkers."""
import pytest

from ftrepair.core import Model, Predicate, Relation, StateSpace, UsageError
from ftrepair.semantics import (
    build_product,
    check_C1,
    format_trace,
    replay_trace,
    verify_failsafe,
    verify_leadsto,
    verify_masking,
    verify_stabilization,
)


def make(n, *, dp=(), de=(), db=(), dr=(), fl=(), inv=(0,), k=2):
    space = StateSpace(n)
    return Model(
        space,
        Relation.from_pairs(space, dp),
        Relation.from_pairs(space, de),
        Relation.from_pairs(space, db),
        Relation.from_pairs(space, dr),
        Relation.from_pairs(space, fl),
        Predicate.from_ids(space, inv),
        k,
    )


def test_stabilization_chain_passes():
    m = make(3, dp=[(1, 0), (2, 1), (0, 0)])
    assert verify_stabilization(m, m.delta_p).passed


def test_invariant_escape_detected():
    m = make(2, dp=[(0, 1), (1, 0)])
    verdict = verify_stabilization(m, m.delta_p)
    assert not verdict.passed and verdict.reason == "invariant-escape"


def test_bad_transition_detected_with_replayable_trace():
    m = make(3, dp=[(2, 1), (1, 0), (0, 0)], db=[(2, 1)])
    verdict = verify_stabilization(m, m.delta_p)
    assert verdict.reason == "bad-transition"
    assert verdict.steps[-1][:2] == (2, 0) and verdict.steps[-1][3] == 1
    assert replay_trace(m, m.delta_p, verdict.steps)


def test_window_blocks_environment_after_reset():
    # the environment kicks 1 back to 2; with k = 2 it can do so every
    # other step forever, with k = 3 the program gets two moves per window
    # and always escapes to the invariant
    dp = [(1, 0), (2, 1), (0, 0)]
    de = [(1, 2)]
    failing = verify_stabilization(make(3, dp=dp, de=de, k=2), make(3, dp=dp).delta_p)
    assert failing.reason == "non-convergence" and failing.cycle
    assert replay_trace(make(3, dp=dp, de=de, k=2), make(3, dp=dp).delta_p,
                        failing.steps + failing.cycle)
    assert verify_stabilization(make(3, dp=dp, de=de, k=3), make(3, dp=dp).delta_p).passed


def test_environment_free_when_program_disabled():
    # at states without a program move the window does not hold the
    # environment back, whatever the credit
    m = make(4, dp=[(3, 2), (0, 0)], de=[(2, 1), (1, 0)], k=3)
    assert verify_stabilization(m, m.delta_p).passed


def test_leadsto():
    space_ok = make(3, dp=[(2, 1), (1, 0), (0, 0)])
    assert verify_leadsto(
        space_ok, space_ok.delta_p,
        Predicate.from_ids(space_ok.space, [2]),
        Predicate.from_ids(space_ok.space, [0]),
    ).passed
    stuck = make(3, dp=[(2, 2), (1, 0), (0, 0)])
    verdict = verify_leadsto(
        stuck, stuck.delta_p,
        Predicate.from_ids(stuck.space, [2]),
        Predicate.from_ids(stuck.space, [0]),
    )
    assert not verdict.passed and verdict.cycle


def test_replay_rejects_tampering():
    m = make(3, dp=[(1, 0), (2, 1), (0, 0)], de=[(1, 2)])
    good = ((1, 0, "E", 2, 1), (2, 1, "P", 1, 0))
    assert replay_trace(m, m.delta_p, good)
    assert not replay_trace(m, m.delta_p, ((1, 0, "E", 2, 0),))  # wrong credit
    assert not replay_trace(m, m.delta_p, ((1, 0, "P", 2, 0),))  # wrong label
    assert not replay_trace(m, m.delta_p, good + ((0, 0, "P", 0, 0),))  # broken chain


def test_format_trace_mentions_labels():
    m = make(2, dp=[(1, 0)])
    text = format_trace(m, ((1, 0, "P", 0, 0),))
    assert "--[P]-->" in text


def test_product_edge_rules():
    m = make(2, dp=[(0, 1)], de=[(0, 0)], k=3)
    prod = build_product(m, m.delta_p)
    # credit 2 with the program enabled: no environment edge
    labels = [lab for lab, _, _ in prod.edges(prod.node(0, 2))]
    assert labels == ["P"]
    # credit 0: both
    labels = sorted(lab for lab, _, _ in prod.edges(prod.node(0, 0)))
    assert labels == ["E", "P"]


def test_check_C1():
    m = make(3, dp=[(0, 1), (1, 0)], de=[(2, 0)], inv=(0, 1))
    inv = m.invariant
    assert check_C1(m, m.delta_p, inv)
    # fresh program transition inside the invariant
    extra = m.delta_p | Relation.from_pairs(m.space, [(0, 0)])
    assert not check_C1(m, extra, inv)
    # claimed invariant not contained in the original
    assert not check_C1(m, m.delta_p, Predicate.full(m.space))
    with pytest.raises(UsageError):
        check_C1(m.with_k(3), m.delta_p, inv)


def test_check_C1_fresh_deadlock():
    m = make(2, dp=[(0, 0), (1, 1)], inv=(0, 1))
    # dropping state 1's only move deadlocks it where the original had one
    pruned = Relation.from_pairs(m.space, [(0, 0)])
    assert not check_C1(m, pruned, m.invariant)


def test_failsafe_and_masking_hand_case():
    m = make(2, dp=[(0, 0)], db=[(1, 1)], fl=[(0, 1)])
    inv = m.invariant
    # no recovery: failsafe holds (state 1 is silent) but masking does not
    assert verify_failsafe(m, m.delta_p, inv).passed
    bad = verify_masking(m, m.delta_p, inv)
    assert not bad.passed and bad.reason == "no-recovery"
    # adding the recovery transition fixes masking
    repaired = m.delta_p | Relation.from_pairs(m.space, [(1, 0)])
    assert verify_masking(m, repaired, inv).passed


def test_failsafe_catches_environment_bad_transition():
    m = make(2, dp=[(0, 0)], de=[(1, 1)], db=[(1, 1)], fl=[(0, 1)])
    verdict = verify_failsafe(m, m.delta_p, m.invariant)
    assert not verdict.passed and verdict.reason == "bad-transition"


def test_failsafe_rejects_restricted_transition():
    m = make(2, dp=[(0, 0)], dr=[(1, 0)], fl=[(0, 1)])
    cand = m.delta_p | Relation.from_pairs(m.space, [(1, 0)])
    verdict = verify_failsafe(m, cand, m.invariant)
    assert verdict.reason == "restricted-transition-used"
