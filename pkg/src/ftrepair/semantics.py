"""Fairness-product semantics and property checkers.

A computation alternates program and environment transitions under a
window discipline: after an environment step, the next ``k - 1`` steps must
be program (or fault) steps whenever a program transition is enabled.  The
checkers explore a product automaton whose nodes pair a state with a
"window credit" in ``0 .. k-1``; an environment edge is admissible only at
credit 0 or where the program is disabled, and it resets the credit to
``k - 1`` while program and fault edges decrement it.
"""
from __future__ import annotations

import dataclasses
from typing import Optional

from .core import (
    Model,
    Predicate,
    Relation,
    UsageError,
    is_closed,
    project,
)

PROGRAM = "P"
ENVIRONMENT = "E"
FAULT = "F"

# A trace step: (src_state, src_credit, label, dst_state, dst_credit)
Step = tuple[int, int, str, int, int]


@dataclasses.dataclass(frozen=True)
class Verdict:
    """Result of a semantic check, with a replayable counterexample on
    failure.  ``steps`` lead from a start node to the violation; ``cycle``
    is present when the violation is a non-converging loop."""

    passed: bool
    reason: str = ""
    steps: tuple[Step, ...] = ()
    cycle: Optional[tuple[Step, ...]] = None

    def __bool__(self) -> bool:
        return self.passed


class Product:
    """Explicit product of a transition system with the window credit."""

    def __init__(self, model: Model, program: Relation, with_faults: bool = False):
        if program.space.count != model.space.count:
            raise UsageError("mismatched state spaces")
        self.model = model
        self.k = model.k
        self.n = model.space.count
        self.psucc = program.adjacency()
        self.esucc = model.delta_e.adjacency()
        self.fsucc = model.faults.adjacency() if with_faults else None

    @property
    def node_count(self) -> int:
        return self.n * self.k

    def node(self, state: int, credit: int) -> int:
        return state * self.k + credit

    def state_of(self, node: int) -> int:
        return node // self.k

    def credit_of(self, node: int) -> int:
        return node % self.k

    def edges(self, node: int):
        """Yield (label, dst_state, dst_credit) for one product node."""
        s, c = divmod(node, self.k)
        down = c - 1 if c else 0
        for t in self.psucc[s]:
            yield PROGRAM, t, down
        if self.fsucc is not None:
            for t in self.fsucc[s]:
                yield FAULT, t, down
        if c == 0 or not self.psucc[s]:
            reset = self.k - 1
            for t in self.esucc[s]:
                yield ENVIRONMENT, t, reset

    def reachable(self, initial_states) -> tuple[bytearray, list[int]]:
        """BFS; returns a visited bitmap over nodes and parent links encoded
        as ``parent[node] = src_node * 4 + label_index`` (-1 for roots)."""
        visited = bytearray(self.node_count)
        parent = [-2] * self.node_count
        stack = []
        for s in initial_states:
            node = self.node(s, 0)
            if not visited[node]:
                visited[node] = 1
                parent[node] = -1
                stack.append(node)
        labels = (PROGRAM, ENVIRONMENT, FAULT)
        while stack:
            node = stack.pop()
            for label, t, c2 in self.edges(node):
                dst = self.node(t, c2)
                if not visited[dst]:
                    visited[dst] = 1
                    parent[dst] = node * 4 + labels.index(label)
                    stack.append(dst)
        return visited, parent

    def path_to(self, parent: list[int], node: int) -> tuple[Step, ...]:
        labels = (PROGRAM, ENVIRONMENT, FAULT)
        steps: list[Step] = []
        cur = node
        while parent[cur] >= 0:
            enc = parent[cur]
            src, li = divmod(enc, 4)
            s1, c1 = divmod(src, self.k)
            s2, c2 = divmod(cur, self.k)
            steps.append((s1, c1, labels[li], s2, c2))
            cur = src
        steps.reverse()
        return tuple(steps)

    def escape_nodes(self, target: Predicate) -> set[int]:
        """Nodes outside ``target`` from which some maximal path never
        reaches a ``target`` state (including deadlocked nodes)."""
        mask = target.mask
        live = {
            node
            for node in range(self.node_count)
            if not mask[self.state_of(node)]
        }
        changed = True
        while changed:
            changed = False
            for node in list(live):
                has_edge = False
                keeps = False
                for _, t, c2 in self.edges(node):
                    has_edge = True
                    if self.node(t, c2) in live:
                        keeps = True
                        break
                if has_edge and not keeps:
                    live.discard(node)
                    changed = True
        return live

    def lasso_within(self, nodes: set[int], start: int) -> tuple[tuple[Step, ...], Optional[tuple[Step, ...]]]:
        """Follow edges inside ``nodes`` from ``start`` until a node repeats
        (loop) or no edge stays inside (deadlock)."""
        order = [start]
        seen = {start: 0}
        steps: list[Step] = []
        cur = start
        while True:
            nxt = None
            for label, t, c2 in self.edges(cur):
                dst = self.node(t, c2)
                if dst in nodes:
                    nxt = (label, dst)
                    break
            if nxt is None:
                return tuple(steps), None
            label, dst = nxt
            s1, c1 = divmod(cur, self.k)
            s2, c2 = divmod(dst, self.k)
            steps.append((s1, c1, label, s2, c2))
            if dst in seen:
                cut = seen[dst]
                return tuple(steps[:cut]), tuple(steps[cut:])
            seen[dst] = len(steps)
            order.append(dst)
            cur = dst


def build_product(model: Model, program: Relation, with_faults: bool = False) -> Product:
    """Construct the window-credit product automaton."""
    return Product(model, program, with_faults)


def format_trace(model: Model, steps: tuple[Step, ...], cycle=None) -> str:
    lines = []
    lab = model.space.label
    for s1, c1, label, s2, c2 in steps:
        lines.append(f"{lab(s1)} --[{label}]--> {lab(s2)} (credit {c2})")
    if cycle:
        lines.append("-- loop --")
        for s1, c1, label, s2, c2 in cycle:
            lines.append(f"{lab(s1)} --[{label}]--> {lab(s2)} (credit {c2})")
    return "\n".join(lines)


def replay_trace(model: Model, program: Relation, steps, with_faults: bool = False,
                 start_credit: int = 0) -> bool:
    """Check that a step sequence is a legal product path."""
    prod = Product(model, program, with_faults)
    credit = start_credit
    prev_state = None
    for s1, c1, label, s2, c2 in steps:
        if prev_state is not None and s1 != prev_state:
            return False
        if c1 != credit:
            return False
        if not any(
            lab == label and t == s2 and cc == c2 for lab, t, cc in prod.edges(prod.node(s1, c1))
        ):
            return False
        prev_state, credit = s2, c2
    return True


def _convergence_counterexample(prod: Product, parent, escape: set[int], bad_node: int) -> Verdict:
    prefix = prod.path_to(parent, bad_node)
    tail, cycle = prod.lasso_within(escape, bad_node)
    return Verdict(False, "non-convergence", prefix + tail, cycle)


def verify_stabilization(model: Model, program: Relation) -> Verdict:
    """Every computation of ``program`` under the environment, from any
    start state, must reach the invariant without the program executing a
    bad transition, and the program must not leave the invariant."""
    S = model.invariant
    escaping = program.between(S, ~S)
    if escaping:
        i, j = escaping.pairs()[0]
        return Verdict(False, "invariant-escape", ((i, 0, PROGRAM, j, 0),))
    prod = Product(model, program, with_faults=False)
    visited, parent = prod.reachable(range(prod.n))
    # program-executed bad transitions
    bad = model.delta_b
    if bad:
        for node in range(prod.node_count):
            if not visited[node]:
                continue
            s, c = divmod(node, prod.k)
            down = c - 1 if c else 0
            for t in prod.psucc[s]:
                if (s, t) in bad:
                    steps = prod.path_to(parent, node) + ((s, c, PROGRAM, t, down),)
                    return Verdict(False, "bad-transition", steps)
    escape = prod.escape_nodes(S)
    for node in sorted(escape):
        if visited[node]:
            return _convergence_counterexample(prod, parent, escape, node)
    return Verdict(True)


def verify_leadsto(model: Model, program: Relation, origin: Predicate, goal: Predicate) -> Verdict:
    """From every reachable node whose state is in ``origin``, every
    computation must reach a ``goal`` state."""
    prod = Product(model, program, with_faults=False)
    visited, parent = prod.reachable(range(prod.n))
    escape = prod.escape_nodes(goal)
    for node in sorted(escape):
        if visited[node] and prod.state_of(node) in origin:
            return _convergence_counterexample(prod, parent, escape, node)
    return Verdict(True)


def check_C1(model: Model, program_prime: Relation, invariant_prime: Predicate) -> bool:
    """Structural test that every computation of the repaired program from
    its invariant is a computation of the original program from the original
    invariant (window width 2 only).

    Five conditions: closure of the new invariant, invariant containment,
    program containment inside the new invariant, no freshly enabled
    environment step right after an environment step, and no fresh deadlock.
    """
    if model.k != 2:
        raise UsageError("this containment test is specific to k = 2")
    S, Sp = model.invariant, invariant_prime
    dp, de, dpp = model.delta_p, model.delta_e, program_prime
    if not is_closed(Sp, dpp | de):
        return False
    if not Sp <= S:
        return False
    if not project(dpp, Sp) <= project(dp, S):
        return False
    entered = de.image(Sp)
    has_e = de.has_out()
    has_p = dp.has_out()
    has_pp = dpp.has_out()
    if entered & has_e & has_p & ~has_pp:
        return False
    # fresh deadlock, within the world reachable from the new invariant
    if Sp & has_p & ~has_pp & ~has_e:
        return False
    return True


def verify_failsafe(model: Model, program_prime: Relation, invariant_prime: Predicate) -> Verdict:
    """The repaired program must never execute or permit a bad transition,
    even in the presence of faults, and its fault-free behaviour from the
    new invariant must be behaviour of the original program."""
    if model.k != 2:
        raise UsageError("failsafe verification requires k = 2")
    if program_prime & model.delta_r:
        return Verdict(False, "restricted-transition-used")
    if not check_C1(model, program_prime, invariant_prime):
        return Verdict(False, "containment-violation")
    prod = Product(model, program_prime, with_faults=True)
    visited, parent = prod.reachable(invariant_prime.members)
    bad = model.delta_b
    if bad:
        for node in range(prod.node_count):
            if not visited[node]:
                continue
            s, c = divmod(node, prod.k)
            for label, t, c2 in prod.edges(node):
                if (s, t) in bad:
                    steps = prod.path_to(parent, node) + ((s, c, label, t, c2),)
                    return Verdict(False, "bad-transition", steps)
    return Verdict(True)


def verify_masking(model: Model, program_prime: Relation, invariant_prime: Predicate) -> Verdict:
    """Failsafe plus recovery: once faults stop, every computation from the
    fault span must return to the new invariant."""
    base = verify_failsafe(model, program_prime, invariant_prime)
    if not base:
        return base
    fprod = Product(model, program_prime, with_faults=True)
    visited, parent = fprod.reachable(invariant_prime.members)
    prod = Product(model, program_prime, with_faults=False)
    escape = prod.escape_nodes(invariant_prime)
    for node in sorted(escape):
        if visited[node]:
            prefix = fprod.path_to(parent, node)
            tail, cycle = prod.lasso_within(escape, node)
            return Verdict(False, "no-recovery", prefix + tail, cycle)
    return Verdict(True)
