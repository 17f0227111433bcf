"""Discrete abelian groups given by canonical words, with Følner schedules.

Batches of group elements travel as integer arrays of shape ``(m, width)``:
exponent vectors for free abelian parts, residues for cyclic parts and a
single bitmask column for the infinite direct sum of Z_2.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import product as iproduct
from typing import Sequence

import numpy as np

from .errors import DomainError, ResourceError

_REGISTRY: dict[str, "Group"] = {}


@dataclass(frozen=True)
class GroupElement:
    group_id: str
    word: tuple[int, ...]

    def __repr__(self):
        return f"{self.group_id}{list(self.word)}"


def get_group(group_id: str) -> "Group":
    try:
        return _REGISTRY[group_id]
    except KeyError:
        raise DomainError(f"unknown group {group_id!r}") from None


class Group:
    """Base class. Subclasses define canonical words and Følner layers."""

    group_id: str
    kind: str
    folner_kind: str
    width: int
    max_index: int
    start_index: int = 0

    def _register(self):
        _REGISTRY.setdefault(self.group_id, self)

    # element level -------------------------------------------------------
    def element(self, word: Sequence[int]) -> GroupElement:
        return self.from_row(self.normalize(np.asarray(self._word_to_row(word)).reshape(1, -1))[0])

    def identity(self) -> GroupElement:
        return self.from_row(np.zeros(self.width, dtype=np.int64))

    def row(self, g: GroupElement) -> np.ndarray:
        self._own(g)
        return np.asarray(self._word_to_row(g.word), dtype=np.int64)

    def rows(self, gs: Sequence[GroupElement]) -> np.ndarray:
        if not gs:
            return np.zeros((0, self.width), dtype=np.int64)
        return np.stack([self.row(g) for g in gs])

    def compose(self, a: GroupElement, b: GroupElement) -> GroupElement:
        self._own(a, b)
        return self.from_row(self.compose_words(self.row(a)[None], self.row(b)[None])[0])

    def inverse(self, a: GroupElement) -> GroupElement:
        return self.from_row(self.invert_words(self.row(a)[None])[0])

    def _own(self, *gs: GroupElement):
        for g in gs:
            if g.group_id != self.group_id:
                raise DomainError(f"element of {g.group_id} used with group {self.group_id}")

    # Følner schedule -----------------------------------------------------
    def folner_words(self, index: int) -> np.ndarray:
        self._check_index(index)
        return self.folner_ring(-1, index)

    def folner_size(self, index: int) -> int:
        raise NotImplementedError

    def next_index(self, index: int) -> int:
        raise NotImplementedError

    def index_cap(self, n_max: int) -> int:
        return min(int(n_max), self.max_index)

    def _check_index(self, index: int):
        if index < 0:
            raise ValueError("Følner index must be nonnegative")
        if index > self.max_index:
            raise ResourceError(
                f"Følner index {index} exceeds the cap {self.max_index} for {self.group_id}")

    def folner_ring(self, prev: int, index: int) -> np.ndarray:
        """Words in F(index) minus F(prev); ``prev=-1`` gives all of F(index)."""
        raise NotImplementedError

    def folner_chunks(self, prev: int, index: int, chunk: int = 1 << 20):
        """Yield the ring F(index) minus F(prev) in bounded chunks."""
        words = self.folner_ring(prev, index)
        for s in range(0, len(words), chunk):
            yield words[s:s + chunk]

    def random_words(self, rng: np.random.Generator, count: int, radius: int) -> np.ndarray:
        raise NotImplementedError

    def generators(self, limit: int | None = None) -> list[GroupElement]:
        raise NotImplementedError

    def __repr__(self):
        return f"<{self.kind} {self.group_id}>"


class FreeAbelian(Group):
    """Z^rank with symmetric cubes [-N, N]^rank as Følner sets."""

    kind = "FreeAbelian"
    folner_kind = "symmetric-cube"

    def __init__(self, rank: int = 1):
        if rank < 1:
            raise ValueError("rank must be >= 1")
        self.rank = rank
        self.width = rank
        self.group_id = "Z" if rank == 1 else f"Z^{rank}"
        self.max_index = (1 << 26) if rank == 1 else int(((1 << 24) ** (1 / rank) - 1) // 2)
        self.start_index = 1024 if rank == 1 else 8
        self._register()

    def _word_to_row(self, word):
        w = tuple(int(v) for v in np.atleast_1d(word))
        if len(w) != self.rank:
            raise DomainError(f"{self.group_id} words have length {self.rank}")
        return w

    def normalize(self, rows):
        return np.asarray(rows, dtype=np.int64)

    def from_row(self, row):
        return GroupElement(self.group_id, tuple(int(v) for v in row))

    def compose_words(self, a, b):
        return np.asarray(a, dtype=np.int64) + np.asarray(b, dtype=np.int64)

    def invert_words(self, a):
        return -np.asarray(a, dtype=np.int64)

    def folner_size(self, index):
        return (2 * index + 1) ** self.rank

    def next_index(self, index):
        return 1 if index == 0 else 2 * index

    def _layer(self, n: int) -> np.ndarray:
        if n == 0:
            return np.zeros((1, self.rank), dtype=np.int64)
        if self.rank == 1:
            return np.array([[n], [-n]], dtype=np.int64)
        side = np.arange(-n, n + 1)
        grid = np.array(list(iproduct(side, repeat=self.rank)), dtype=np.int64)
        return grid[np.abs(grid).max(axis=1) == n]

    def folner_ring(self, prev, index):
        self._check_index(index)
        if self.rank == 1:
            lo = prev + 1
            if lo > index:
                return np.zeros((0, 1), dtype=np.int64)
            parts = []
            if lo == 0:
                parts.append(np.zeros(1, dtype=np.int64))
                lo = 1
            n = np.arange(lo, index + 1, dtype=np.int64)
            parts.append(np.stack([n, -n], axis=1).reshape(-1))
            return np.concatenate(parts).reshape(-1, 1)
        layers = [self._layer(n) for n in range(prev + 1, index + 1)]
        if not layers:
            return np.zeros((0, self.rank), dtype=np.int64)
        return np.concatenate(layers)

    def random_words(self, rng, count, radius):
        return rng.integers(-radius, radius + 1, size=(count, self.rank), dtype=np.int64)

    def generators(self, limit=None):
        return [self.from_row(np.eye(self.rank, dtype=np.int64)[i]) for i in range(self.rank)]


class FiniteCyclic(Group):
    """Z_n; every Følner set is the whole group, so averages are exact."""

    kind = "FiniteCyclic"
    folner_kind = "full-group"

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("order must be >= 1")
        self.n = n
        self.width = 1
        self.group_id = f"Z_{n}"
        self.max_index = 1 << 30
        self._register()

    def _word_to_row(self, word):
        w = tuple(int(v) for v in np.atleast_1d(word))
        if len(w) != 1:
            raise DomainError(f"{self.group_id} words have length 1")
        return w

    def normalize(self, rows):
        return np.mod(np.asarray(rows, dtype=np.int64), self.n)

    def from_row(self, row):
        return GroupElement(self.group_id, (int(row[0]) % self.n,))

    def compose_words(self, a, b):
        return np.mod(np.asarray(a, dtype=np.int64) + np.asarray(b, dtype=np.int64), self.n)

    def invert_words(self, a):
        return np.mod(-np.asarray(a, dtype=np.int64), self.n)

    def folner_size(self, index):
        return self.n

    def next_index(self, index):
        return index + 1

    def folner_ring(self, prev, index):
        self._check_index(index)
        if prev >= 0:
            return np.zeros((0, 1), dtype=np.int64)
        return np.arange(self.n, dtype=np.int64).reshape(-1, 1)

    def random_words(self, rng, count, radius):
        return rng.integers(0, self.n, size=(count, 1), dtype=np.int64)

    def generators(self, limit=None):
        return [self.from_row(np.array([1 % self.n]))]


class InfiniteSumZ2(Group):
    """The direct sum of countably many Z_2.

    Words are finite bit tuples (trailing zeros stripped); batches use one
    int64 bitmask column, bit ``k-1`` for coordinate ``k``. The Følner set at
    index ``n`` is the subgroup G_n of elements supported on coordinates 1..n.
    """

    kind = "InfiniteSumZ2"
    folner_kind = "subgroup-chain"
    width = 1
    max_index = 30
    start_index = 1

    def __init__(self):
        self.group_id = "Z2^(inf)"
        self._register()

    def _word_to_row(self, word):
        bits = [int(b) for b in np.atleast_1d(word)] if len(np.atleast_1d(word)) else []
        if len(bits) > 62:
            raise ResourceError("support beyond coordinate 62 is not representable")
        mask = 0
        for k, b in enumerate(bits):
            if b % 2:
                mask |= 1 << k
        return (mask,)

    def normalize(self, rows):
        return np.asarray(rows, dtype=np.int64)

    def from_row(self, row):
        mask = int(row[0])
        bits = []
        while mask:
            bits.append(mask & 1)
            mask >>= 1
        return GroupElement(self.group_id, tuple(bits))

    def compose_words(self, a, b):
        return np.bitwise_xor(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))

    def invert_words(self, a):
        return np.asarray(a, dtype=np.int64).copy()

    def folner_size(self, index):
        return 1 << index

    def next_index(self, index):
        return index + 1

    def index_cap(self, n_max):
        return min(max(int(n_max).bit_length() - 1, 0), self.max_index)

    def folner_ring(self, prev, index):
        self._check_index(index)
        lo = 0 if prev < 0 else 1 << prev
        return np.arange(lo, 1 << index, dtype=np.int64).reshape(-1, 1)

    def random_words(self, rng, count, radius):
        bits = min(int(radius), 62)
        return rng.integers(0, 1 << bits, size=(count, 1), dtype=np.int64)

    def generators(self, limit=None):
        if limit is None:
            raise ResourceError("the direct sum of Z_2 has infinitely many generators; pass limit")
        return [self.from_row(np.array([1 << k])) for k in range(limit)]


class DirectSum(Group):
    """Direct sum of the given parts with the product Følner schedule."""

    kind = "DirectSum"
    folner_kind = "product"

    def __init__(self, parts: Sequence[Group]):
        if len(parts) < 2:
            raise ValueError("a direct sum needs at least two parts")
        self.parts = tuple(parts)
        self.width = sum(p.width for p in parts)
        self.group_id = "+".join(p.group_id for p in parts)
        self.max_index = min(p.max_index for p in parts)
        self.start_index = max(p.start_index for p in parts)
        self._register()

    @cached_property
    def _slices(self):
        out, s = [], 0
        for p in self.parts:
            out.append(slice(s, s + p.width))
            s += p.width
        return out

    def _word_to_row(self, word):
        w = [int(v) for v in np.atleast_1d(word)]
        if len(w) != self.width:
            raise DomainError(f"{self.group_id} words have length {self.width}")
        return tuple(w)

    def normalize(self, rows):
        rows = np.asarray(rows, dtype=np.int64)
        return np.concatenate([p.normalize(rows[:, s]) for p, s in zip(self.parts, self._slices)], axis=1)

    def from_row(self, row):
        row = self.normalize(np.asarray(row).reshape(1, -1))[0]
        return GroupElement(self.group_id, tuple(int(v) for v in row))

    def compose_words(self, a, b):
        a = np.atleast_2d(a)
        b = np.atleast_2d(b)
        return np.concatenate(
            [p.compose_words(a[:, s], b[:, s]) for p, s in zip(self.parts, self._slices)], axis=1)

    def invert_words(self, a):
        a = np.atleast_2d(a)
        return np.concatenate([p.invert_words(a[:, s]) for p, s in zip(self.parts, self._slices)], axis=1)

    def folner_size(self, index):
        return int(np.prod([p.folner_size(index) for p in self.parts]))

    def next_index(self, index):
        return max(p.next_index(index) for p in self.parts)

    def index_cap(self, n_max):
        return min(p.index_cap(n_max) for p in self.parts if p.kind != "FiniteCyclic")

    @staticmethod
    def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if len(a) == 0 or len(b) == 0:
            return np.zeros((0, a.shape[1] + b.shape[1]), dtype=np.int64)
        return np.concatenate([np.repeat(a, len(b), axis=0), np.tile(b, (len(a), 1))], axis=1)

    def folner_ring(self, prev, index):
        self._check_index(index)
        # F(i) \ F(p) for a product: (R_head x F_tail(i)) u (F_head(p) x R_tail)
        head, tail = self.parts[0], self.parts[1:]
        tail_group = tail[0] if len(tail) == 1 else DirectSum(tail)
        head_ring = head.folner_ring(prev, index)
        out = self._cross(head_ring, tail_group.folner_words(index))
        if prev >= 0:
            out = np.concatenate([out, self._cross(head.folner_words(prev),
                                                   tail_group.folner_ring(prev, index))])
        return out

    def random_words(self, rng, count, radius):
        return np.concatenate([p.random_words(rng, count, radius) for p in self.parts], axis=1)

    def generators(self, limit=None):
        gens = []
        for i, p in enumerate(self.parts):
            for g in p.generators(limit):
                row = np.zeros(self.width, dtype=np.int64)
                row[self._slices[i]] = p.row(g)
                gens.append(self.from_row(row))
        return gens


@dataclass(frozen=True, eq=False)
class FolnerSet:
    group: Group
    index: int
    words: np.ndarray

    @property
    def elements(self) -> list[GroupElement]:
        return [self.group.from_row(r) for r in self.words]

    def __len__(self):
        return len(self.words)


def folner_set(group: Group, index: int) -> FolnerSet:
    return FolnerSet(group, index, group.folner_words(index))


def compose(a: GroupElement, b: GroupElement) -> GroupElement:
    if a.group_id != b.group_id:
        raise DomainError(f"cannot compose elements of {a.group_id} and {b.group_id}")
    return get_group(a.group_id).compose(a, b)


def inverse(a: GroupElement) -> GroupElement:
    return get_group(a.group_id).inverse(a)
