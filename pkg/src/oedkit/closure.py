"""Equivalence classes of Pauli strings under commutation with Hamiltonian strings.

The class of a seed is everything reachable by repeatedly commuting with the
Hamiltonian strings.  Commutation moves ``P`` to ``H P`` (up to phase) exactly
when ``H`` and ``P`` anticommute, and ``H P`` again anticommutes with ``H``, so
the reachability graph is undirected.  The breadth-first search below relies
on that: a new level only has to be checked against the previous two levels,
never against the whole visited set.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._keys import codec_for, isin_sorted
from .models import Hamiltonian
from .pauli import DimensionError, PauliString

__all__ = [
    "DEFAULT_BUDGET",
    "OED",
    "EquivalenceClass",
    "IncompleteClassError",
    "Partition",
    "class_membership",
    "closure",
    "generate_class",
    "oed",
    "partition_all",
]

DEFAULT_BUDGET = 10_000_000
PARTITION_CAP = 10

# bits -> list of neighbour bit arrays; must describe a symmetric relation
NeighbourFn = Callable[[np.ndarray], list]


class IncompleteClassError(RuntimeError):
    """Operation needs a complete class but the budget was exhausted."""


@dataclass(eq=False)
class EquivalenceClass:
    num_sites: int
    keys: np.ndarray
    seed: PauliString
    complete: bool
    depth: int
    codec: object = field(repr=False)
    _members: list | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return int(self.keys.shape[0])

    def __len__(self) -> int:
        return self.size

    @property
    def oed(self) -> int | None:
        return self.size if self.complete else None

    @property
    def members(self) -> list[PauliString]:
        if self._members is None:
            self._members = self.codec.decode(self.keys)
        return self._members

    def member_set(self) -> frozenset[PauliString]:
        return frozenset(self.members)

    def index_of(self, p: PauliString) -> int:
        q = self.codec.encode([p])
        i = int(np.searchsorted(self.keys, q[0]))
        if i >= self.size or self.keys[i] != q[0]:
            raise KeyError(str(p))
        return i

    def __contains__(self, p: PauliString) -> bool:
        if p.num_sites != self.num_sites:
            return False
        return bool(isin_sorted(self.codec.encode([p]), self.keys)[0])

    def same_members(self, other: EquivalenceClass) -> bool:
        return self.num_sites == other.num_sites and np.array_equal(self.keys, other.keys)


class OED(NamedTuple):
    count: int
    exact: bool


def _terms(codec, strings: Iterable[PauliString]):
    return [codec.term(p) for p in strings]


def _bfs(codec, terms, sources: np.ndarray, budget: int,
         neighbours: Sequence[NeighbourFn] = ()) -> tuple[np.ndarray, bool, int]:
    prev = codec.empty()
    cur = np.unique(sources)
    levels = [cur]
    total = cur.shape[0]
    depth = 0
    while cur.shape[0]:
        bits = codec.to_bits(cur)
        cands = []
        for h, s in terms:
            m = codec.anticommutes(bits, s)
            if m.any():
                cands.append(bits[m] ^ h)
        for fn in neighbours:
            cands.extend(fn(bits))
        if not cands:
            break
        new = np.unique(codec.from_bits(np.concatenate(cands)))
        new = new[~isin_sorted(new, cur)]
        new = new[~isin_sorted(new, prev)]
        if new.shape[0] == 0:
            break
        depth += 1
        levels.append(new)
        total += new.shape[0]
        prev, cur = cur, new
        if total > budget:
            return np.sort(np.concatenate(levels)), False, depth
    return np.sort(np.concatenate(levels)), True, depth


def closure(h: Hamiltonian, sources: Sequence[PauliString], budget: int = DEFAULT_BUDGET,
            neighbours: Sequence[NeighbourFn] = (), seed: PauliString | None = None,
            codec=None) -> EquivalenceClass:
    """Multi-source closure; ``neighbours`` adds extra symmetric edges (gate images)."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    for p in sources:
        if p.num_sites != h.num_sites:
            raise DimensionError(f"seed has {p.num_sites} sites, Hamiltonian {h.num_sites}")
    codec = codec or codec_for(h.num_sites)
    keys, complete, depth = _bfs(codec, _terms(codec, h.strings), codec.encode(sources), budget, neighbours)
    return EquivalenceClass(h.num_sites, keys, seed if seed is not None else sources[0],
                            complete, depth, codec)


def generate_class(h: Hamiltonian, seed: PauliString, budget: int = DEFAULT_BUDGET) -> EquivalenceClass:
    """Equivalence class of ``seed``.

    Zero-weight terms never reach the generating set (``Hamiltonian`` drops
    them), so membership depends only on which strings occur.  When more
    than ``budget`` strings are found the search stops and the result has
    ``complete=False``; its members are then a reachable subset.
    """
    return closure(h, [seed], budget, seed=seed)


def oed(h: Hamiltonian, seed: PauliString, budget: int = DEFAULT_BUDGET) -> OED:
    """Operator evolution dimension; ``exact=False`` marks a lower bound."""
    c = generate_class(h, seed, budget)
    return OED(c.size, c.complete)


def class_membership(cls: EquivalenceClass, p: PauliString) -> bool:
    if not cls.complete:
        raise IncompleteClassError("membership is undefined for an incomplete class")
    return p in cls


@dataclass
class Partition:
    num_sites: int
    classes: list[EquivalenceClass]

    @property
    def K(self) -> int:
        return len(self.classes)

    @property
    def sizes(self) -> list[int]:
        return [c.size for c in self.classes]

    def class_of(self, p: PauliString) -> EquivalenceClass:
        for c in self.classes:
            if p in c:
                return c
        raise KeyError(str(p))


def partition_all(h: Hamiltonian, cap: int = PARTITION_CAP) -> Partition:
    """Split all ``4**L`` strings into classes, sorted by (size, first member)."""
    L = h.num_sites
    if L > cap:
        raise ValueError(f"partition_all needs L <= {cap}, got {L}")
    codec = codec_for(L)
    terms = _terms(codec, h.strings)
    # packed keys enumerate exactly 0 .. 4**L - 1
    everything = np.arange(4**L, dtype=np.uint64)
    frozen = np.ones(everything.shape[0], dtype=bool)
    for _, s in terms:
        frozen &= ~codec.anticommutes(everything, s)
    classes = []
    for k in np.flatnonzero(frozen):
        key = everything[k: k + 1]
        classes.append(EquivalenceClass(L, key, codec.decode(key)[0], True, 0, codec))
    assigned = frozen
    start = 0
    while True:
        rest = np.flatnonzero(~assigned[start:])
        if rest.size == 0:
            break
        start += int(rest[0])
        src = everything[start: start + 1]
        keys, _, depth = _bfs(codec, terms, src, 4**L)
        assigned[keys.astype(np.int64)] = True
        classes.append(EquivalenceClass(L, keys, codec.decode(src)[0], True, depth, codec))
    classes.sort(key=lambda c: (c.size, int(c.keys[0])))
    return Partition(L, classes)
