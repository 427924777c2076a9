"""Core value types for finite transition systems.

States are dense integer indices into a :class:`StateSpace`.  Relations are
stored as bit-packed adjacency matrices (one row of packed bits per source
state) so that set operations and image/preimage queries stay cheap even for
state spaces in the tens of thousands.  All values are immutable after
construction; every operation is a pure function of its inputs.
"""
from __future__ import annotations

import dataclasses
from typing import Iterable, Iterator, Mapping, Optional

import numpy as np

_POPCOUNT = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint32)


class UsageError(ValueError):
    """Malformed input or broken precondition (distinct from a repair
    being impossible)."""


class StateCapExceeded(UsageError):
    """State enumeration would exceed the configured cap."""


@dataclasses.dataclass(frozen=True)
class StateSpace:
    """A finite set of states ``0 .. count-1`` with optional labels."""

    count: int
    labels: Optional[tuple[str, ...]] = None

    def __post_init__(self) -> None:
        if self.count < 1:
            raise UsageError("state space must contain at least one state")
        if self.labels is not None:
            labels = tuple(self.labels)
            object.__setattr__(self, "labels", labels)
            if len(labels) != self.count:
                raise UsageError("label list length must equal state count")
            if len(set(labels)) != len(labels):
                raise UsageError("state labels must be unique")

    def label(self, state: int) -> str:
        if self.labels is not None:
            return self.labels[state]
        return f"s{state}"

    @property
    def nbytes(self) -> int:
        return (self.count + 7) // 8


def _check_same_space(a, b) -> None:
    if a.space.count != b.space.count:
        raise UsageError("mismatched state spaces")


def _pack_mask(mask: np.ndarray) -> np.ndarray:
    return np.packbits(mask.astype(bool))


class Predicate:
    """An immutable set of states."""

    __slots__ = ("space", "_mask", "_count")

    def __init__(self, space: StateSpace, mask: np.ndarray):
        mask = np.array(mask, dtype=bool)
        if mask.shape != (space.count,):
            raise UsageError("predicate mask has wrong shape")
        mask.setflags(write=False)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "_mask", mask)
        object.__setattr__(self, "_count", None)

    def __setattr__(self, name, value):  # pragma: no cover - defensive
        raise AttributeError("Predicate is immutable")

    @classmethod
    def from_ids(cls, space: StateSpace, ids: Iterable[int]) -> "Predicate":
        mask = np.zeros(space.count, dtype=bool)
        for i in ids:
            if not 0 <= i < space.count:
                raise UsageError(f"state id {i} out of range")
            mask[i] = True
        return cls(space, mask)

    @classmethod
    def empty(cls, space: StateSpace) -> "Predicate":
        return cls(space, np.zeros(space.count, dtype=bool))

    @classmethod
    def full(cls, space: StateSpace) -> "Predicate":
        return cls(space, np.ones(space.count, dtype=bool))

    @property
    def mask(self) -> np.ndarray:
        return self._mask

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.nonzero(self._mask)[0])

    def __contains__(self, state: int) -> bool:
        return bool(self._mask[state])

    def __len__(self) -> int:
        if self._count is None:
            object.__setattr__(self, "_count", int(self._mask.sum()))
        return self._count

    def __bool__(self) -> bool:
        return len(self) > 0

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __or__(self, other: "Predicate") -> "Predicate":
        _check_same_space(self, other)
        return Predicate(self.space, self._mask | other._mask)

    def __and__(self, other: "Predicate") -> "Predicate":
        _check_same_space(self, other)
        return Predicate(self.space, self._mask & other._mask)

    def __sub__(self, other: "Predicate") -> "Predicate":
        _check_same_space(self, other)
        return Predicate(self.space, self._mask & ~other._mask)

    def __invert__(self) -> "Predicate":
        return Predicate(self.space, ~self._mask)

    def __le__(self, other: "Predicate") -> bool:
        _check_same_space(self, other)
        return bool(np.all(~self._mask | other._mask))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Predicate):
            return NotImplemented
        return self.space.count == other.space.count and bool(
            np.array_equal(self._mask, other._mask)
        )

    def __hash__(self) -> int:
        return hash((self.space.count, self._mask.tobytes()))

    def __repr__(self) -> str:
        return f"Predicate({{{', '.join(map(str, self.members))}}})"


class Relation:
    """An immutable set of (source, target) state pairs."""

    __slots__ = ("space", "_m", "_succ", "_count")

    def __init__(self, space: StateSpace, packed: np.ndarray):
        packed = np.array(packed, dtype=np.uint8)
        if packed.shape != (space.count, space.nbytes):
            raise UsageError("relation matrix has wrong shape")
        pad = space.nbytes * 8 - space.count
        if pad:
            packed[:, -1] &= np.uint8((0xFF << pad) & 0xFF)
        packed.setflags(write=False)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "_m", packed)
        object.__setattr__(self, "_succ", None)
        object.__setattr__(self, "_count", None)

    def __setattr__(self, name, value):  # pragma: no cover - defensive
        raise AttributeError("Relation is immutable")

    # -- constructors -------------------------------------------------
    @classmethod
    def from_pairs(cls, space: StateSpace, pairs: Iterable[tuple[int, int]]) -> "Relation":
        m = np.zeros((space.count, space.nbytes), dtype=np.uint8)
        src, dst = [], []
        for i, j in pairs:
            if not (0 <= i < space.count and 0 <= j < space.count):
                raise UsageError(f"state pair ({i}, {j}) out of range")
            src.append(i)
            dst.append(j)
        if src:
            ii = np.asarray(src)
            jj = np.asarray(dst)
            np.bitwise_or.at(m, (ii, jj >> 3), (1 << (7 - (jj & 7))).astype(np.uint8))
        return cls(space, m)

    @classmethod
    def from_bool(cls, space: StateSpace, matrix: np.ndarray) -> "Relation":
        matrix = np.asarray(matrix, dtype=bool)
        if matrix.shape != (space.count, space.count):
            raise UsageError("boolean relation matrix has wrong shape")
        return cls(space, np.packbits(matrix, axis=1))

    @classmethod
    def from_row_chunks(cls, space: StateSpace, chunks: Iterable[np.ndarray]) -> "Relation":
        """Build from an iterator of boolean row blocks (memory friendly)."""
        rows = [np.packbits(np.asarray(c, dtype=bool), axis=1) for c in chunks]
        m = np.concatenate(rows, axis=0)
        return cls(space, m)

    @classmethod
    def empty(cls, space: StateSpace) -> "Relation":
        return cls(space, np.zeros((space.count, space.nbytes), dtype=np.uint8))

    @classmethod
    def into(cls, space: StateSpace, targets: Predicate) -> "Relation":
        """All pairs whose target lies in ``targets``."""
        row = _pack_mask(targets.mask)
        return cls(space, np.broadcast_to(row, (space.count, space.nbytes)).copy())

    @classmethod
    def from_sources(cls, space: StateSpace, sources: Predicate) -> "Relation":
        """All pairs whose source lies in ``sources``."""
        full = np.full(space.nbytes, 0xFF, dtype=np.uint8)
        m = np.where(sources.mask[:, None], full, np.uint8(0))
        return cls(space, m)

    # -- queries ------------------------------------------------------
    def __contains__(self, pair: tuple[int, int]) -> bool:
        i, j = pair
        return bool((self._m[i, j >> 3] >> (7 - (j & 7))) & 1)

    def __len__(self) -> int:
        if self._count is None:
            object.__setattr__(self, "_count", int(_POPCOUNT[self._m].sum()))
        return self._count

    def __bool__(self) -> bool:
        return len(self) > 0

    def pairs(self) -> list[tuple[int, int]]:
        out = []
        n = self.space.count
        for i in range(n):
            row = np.unpackbits(self._m[i], count=n)
            for j in np.nonzero(row)[0]:
                out.append((i, int(j)))
        return out

    def successors(self, state: int) -> tuple[int, ...]:
        return self.adjacency()[state]

    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        if self._succ is None:
            n = self.space.count
            adj = []
            step = max(1, (1 << 22) // max(n, 1))
            for lo in range(0, n, step):
                block = np.unpackbits(self._m[lo : lo + step], axis=1)[:, :n]
                for row in block:
                    adj.append(tuple(int(j) for j in np.nonzero(row)[0]))
            object.__setattr__(self, "_succ", tuple(adj))
        return self._succ

    def image(self, pred: Predicate) -> Predicate:
        _check_same_space(self, pred)
        idx = np.nonzero(pred.mask)[0]
        if idx.size == 0:
            return Predicate.empty(self.space)
        row = np.bitwise_or.reduce(self._m[idx], axis=0)
        mask = np.unpackbits(row, count=self.space.count).astype(bool)
        return Predicate(self.space, mask)

    def preimage(self, pred: Predicate) -> Predicate:
        _check_same_space(self, pred)
        row = _pack_mask(pred.mask)
        hits = (self._m & row).any(axis=1)
        return Predicate(self.space, hits)

    def has_out(self) -> Predicate:
        """States with at least one outgoing pair."""
        return Predicate(self.space, self._m.any(axis=1))

    def between(self, sources: Predicate, targets: Predicate) -> "Relation":
        _check_same_space(self, sources)
        _check_same_space(self, targets)
        row = _pack_mask(targets.mask)
        m = np.where(sources.mask[:, None], self._m & row, np.uint8(0))
        return Relation(self.space, m)

    # -- set algebra ---------------------------------------------------
    def __or__(self, other: "Relation") -> "Relation":
        _check_same_space(self, other)
        return Relation(self.space, self._m | other._m)

    def __and__(self, other: "Relation") -> "Relation":
        _check_same_space(self, other)
        return Relation(self.space, self._m & other._m)

    def __sub__(self, other: "Relation") -> "Relation":
        _check_same_space(self, other)
        return Relation(self.space, self._m & ~other._m)

    def complement(self) -> "Relation":
        return Relation(self.space, ~self._m)

    def __le__(self, other: "Relation") -> bool:
        _check_same_space(self, other)
        return bool(np.all((self._m & ~other._m) == 0))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Relation):
            return NotImplemented
        return self.space.count == other.space.count and bool(
            np.array_equal(self._m, other._m)
        )

    def __hash__(self) -> int:
        return hash((self.space.count, self._m.tobytes()))

    def __repr__(self) -> str:
        if self.space.count <= 16:
            return f"Relation({self.pairs()!r})"
        return f"Relation(<{len(self)} pairs over {self.space.count} states>)"

    def transitive_closure(self) -> "Relation":
        n = self.space.count
        m = self._m.copy()
        while True:
            before = m.copy()
            # compose: row i gains the union of rows of its successors
            for i in range(n):
                row = np.unpackbits(m[i], count=n)
                succ = np.nonzero(row)[0]
                if succ.size:
                    m[i] |= np.bitwise_or.reduce(m[succ], axis=0)
            if np.array_equal(before, m):
                return Relation(self.space, m)


# -- elementary operations --------------------------------------------

def project(rel: Relation, pred: Predicate) -> Relation:
    """Pairs of ``rel`` that start and end inside ``pred``."""
    return rel.between(pred, pred)


def image(rel: Relation, pred: Predicate) -> Predicate:
    return rel.image(pred)


def preimage(rel: Relation, pred: Predicate) -> Predicate:
    return rel.preimage(pred)


def is_closed(pred: Predicate, rel: Relation) -> bool:
    """True iff no pair of ``rel`` leaves ``pred``."""
    return rel.image(pred) <= pred


@dataclasses.dataclass(frozen=True)
class Model:
    """A full repair-problem instance over one state space."""

    space: StateSpace
    delta_p: Relation
    delta_e: Relation
    delta_b: Relation
    delta_r: Relation
    faults: Relation
    invariant: Predicate
    k: int

    def __post_init__(self) -> None:
        if self.k <= 1:
            raise UsageError("fairness parameter k must be greater than 1")
        for rel in (self.delta_p, self.delta_e, self.delta_b, self.delta_r, self.faults):
            if rel.space.count != self.space.count:
                raise UsageError("relation defined over a different state space")
        if self.invariant.space.count != self.space.count:
            raise UsageError("invariant defined over a different state space")

    def with_k(self, k: int) -> "Model":
        return dataclasses.replace(self, k=k)


def validate_ft_input(model: Model) -> None:
    """Check the extra preconditions of a fault-tolerance repair input."""
    if model.delta_p & model.delta_r:
        raise UsageError("program transitions overlap the restricted set")
    if not is_closed(model.invariant, model.delta_p | model.delta_e):
        raise UsageError("invariant is not closed under program plus environment")
    if not model.invariant:
        raise UsageError("invariant must be nonempty")


def augment_selfloops(model: Model) -> tuple[Model, Predicate]:
    """Give every invariant state that is stuck in program+environment a
    program self-loop; return the augmented model and the set of states so
    treated (so the loops can be stripped from a final repair)."""
    stuck = model.invariant - (model.delta_p | model.delta_e).has_out()
    if not stuck:
        return model, stuck
    loops = Relation.from_pairs(model.space, [(s, s) for s in stuck])
    return dataclasses.replace(model, delta_p=model.delta_p | loops), stuck


@dataclasses.dataclass(frozen=True)
class Repaired:
    """A successful repair: the new program and its invariant."""

    delta_p_prime: Relation
    invariant_prime: Predicate
    stats: Mapping = dataclasses.field(default_factory=dict, compare=False, repr=False)


@dataclasses.dataclass(frozen=True)
class NotPossible:
    """No program satisfying the repair obligations exists."""

    stats: Mapping = dataclasses.field(default_factory=dict, compare=False, repr=False)


RepairOutcome = Repaired | NotPossible
