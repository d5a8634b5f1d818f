"""Sparse nonnegative vectors, probability distributions and partitions.

Element ids are unsigned 64-bit integers.  Entries are kept sorted by id and
zero-mass entries are never stored, so the support of a vector is exactly the
set of stored ids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator

import numpy as np

__all__ = [
    "MAX_ID",
    "NORMALIZATION_TOL",
    "SparseVector",
    "SparseDistribution",
    "normalize",
    "Partition",
    "coarsen",
]

MAX_ID = (1 << 64) - 1

# Tolerance for "sums to one": double-precision accumulation over supports of
# up to ~1e5 entries stays orders of magnitude inside it.
NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True)
class SparseVector:
    """Nonnegative vector stored as (element_id, mass) pairs sorted by id."""

    entries: tuple[tuple[int, float], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "entries", tuple((int(i), float(m)) for i, m in self.entries)
        )
        prev = -1
        for eid, mass in self.entries:
            if not 0 <= eid <= MAX_ID:
                raise ValueError(f"element id {eid} outside unsigned 64-bit range")
            if eid <= prev:
                raise ValueError("element ids must be strictly increasing")
            if not math.isfinite(mass) or mass <= 0.0:
                raise ValueError(f"mass for element {eid} must be positive and finite")
            prev = eid

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, float]]) -> "SparseVector":
        """Build from unordered pairs: duplicates add, zero masses drop."""
        acc: dict[int, float] = {}
        for eid, mass in pairs:
            eid = int(eid)
            acc[eid] = acc.get(eid, 0.0) + float(mass)
        return cls(tuple((i, m) for i, m in sorted(acc.items()) if m != 0.0))

    @classmethod
    def from_dense(cls, masses: Iterable[float]) -> "SparseVector":
        """Vector over ids 0..n-1; zero positions are skipped."""
        return cls(tuple((i, float(m)) for i, m in enumerate(masses) if m != 0.0))

    @cached_property
    def ids(self) -> np.ndarray:
        arr = np.array([e[0] for e in self.entries], dtype=np.uint64)
        arr.setflags(write=False)
        return arr

    @cached_property
    def masses(self) -> np.ndarray:
        arr = np.array([e[1] for e in self.entries], dtype=np.float64)
        arr.setflags(write=False)
        return arr

    @cached_property
    def total(self) -> float:
        return math.fsum(m for _, m in self.entries)

    @cached_property
    def support(self) -> frozenset[int]:
        return frozenset(e[0] for e in self.entries)

    @cached_property
    def _index(self) -> dict[int, float]:
        return dict(self.entries)

    def mass_of(self, element_id: int) -> float:
        """Mass of an element, 0.0 if absent."""
        return self._index.get(element_id, 0.0)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[tuple[int, float]]:
        return iter(self.entries)


@dataclass(frozen=True)
class SparseDistribution(SparseVector):
    """Sparse vector whose masses sum to one within :data:`NORMALIZATION_TOL`."""

    def __post_init__(self) -> None:
        super().__post_init__()
        if not self.entries:
            raise ValueError("degenerate distribution")
        if abs(self.total - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"masses sum to {self.total!r}, not 1")


def normalize(v: SparseVector) -> SparseDistribution:
    """Scale a nonnegative vector to total mass one.

    Raises ``ValueError("degenerate distribution")`` for an empty (equivalently
    all-zero) vector.  Entry order is preserved.
    """
    if not v.entries:
        raise ValueError("degenerate distribution")
    t = v.total
    return SparseDistribution(tuple((i, m / t) for i, m in v.entries))


@dataclass(frozen=True)
class Partition:
    """Disjoint groups of element ids.

    A merged group is identified by its smallest member id, so coarsening by
    singletons is the identity map.
    """

    groups: tuple[frozenset[int], ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "groups", tuple(frozenset(int(i) for i in g) for g in self.groups)
        )
        seen: set[int] = set()
        for g in self.groups:
            if not g:
                raise ValueError("empty partition group")
            if seen & g:
                raise ValueError("partition groups must be disjoint")
            seen |= g

    @classmethod
    def of(cls, *groups: Iterable[int]) -> "Partition":
        return cls(tuple(frozenset(g) for g in groups))

    @classmethod
    def singletons(cls, ids: Iterable[int]) -> "Partition":
        return cls(tuple(frozenset((int(i),)) for i in ids))

    @cached_property
    def universe(self) -> frozenset[int]:
        out: set[int] = set()
        for g in self.groups:
            out |= g
        return frozenset(out)


def coarsen(x: SparseDistribution, partition: Partition) -> SparseDistribution:
    """Push a distribution forward through a partition: member masses add.

    Every support element of ``x`` must be covered by some group; groups may
    also contain ids outside the support.
    """
    owner: dict[int, int] = {}
    for gi, g in enumerate(partition.groups):
        for eid in g:
            owner[eid] = gi
    sums: dict[int, list[float]] = {}
    for eid, m in x.entries:
        gi = owner.get(eid)
        if gi is None:
            raise ValueError(f"partition does not cover element {eid}")
        sums.setdefault(gi, []).append(m)
    merged = sorted((min(partition.groups[gi]), math.fsum(ms)) for gi, ms in sums.items())
    return SparseDistribution(tuple(merged))
