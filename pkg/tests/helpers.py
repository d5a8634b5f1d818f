"""Shared deterministic generators for the test suite."""

from __future__ import annotations

import numpy as np

from jpminhash.sparse import SparseDistribution, SparseVector, normalize

# x = (0.5, 0.4, 0.1) vs y = (0.2, 0.4, 0.4): the worked reference pair.
# Its jp is 1/5 + 4/13 + 1/10 = 79/130 with per-element terms (0.2, 4/13, 0.1).
REF_X = SparseDistribution(((0, 0.5), (1, 0.4), (2, 0.1)))
REF_Y = SparseDistribution(((0, 0.2), (1, 0.4), (2, 0.4)))
REF_JP = 79.0 / 130.0
REF_JW = 7.0 / 13.0
REF_TV = 0.3


def rand_dist(rng: np.random.Generator, ids) -> SparseDistribution:
    ids = np.asarray(ids, dtype=np.uint64)
    masses = np.maximum(rng.exponential(size=ids.shape[0]), 1e-12)
    return normalize(SparseVector.from_pairs(zip(ids.tolist(), masses.tolist())))


def rand_pair(
    rng: np.random.Generator, max_side: int = 30
) -> tuple[SparseDistribution, SparseDistribution]:
    """Random pair with overlap anywhere between disjoint and identical."""
    shared = int(rng.integers(0, max_side + 1))
    only_x = int(rng.integers(0 if shared else 1, max_side + 1))
    only_y = int(rng.integers(0 if shared else 1, max_side + 1))
    pool = rng.choice(1_000_000, size=shared + only_x + only_y, replace=False).astype(np.uint64)
    x = rand_dist(rng, pool[: shared + only_x])
    y = rand_dist(rng, np.concatenate([pool[:shared], pool[shared + only_x :]]))
    return x, y


def uniform_on(ids) -> SparseDistribution:
    ids = sorted(int(i) for i in ids)
    return normalize(SparseVector(tuple((i, 1.0) for i in ids)))


def sigma_band(p: float, n: int, sigmas: float = 4.0) -> float:
    return sigmas * (p * (1.0 - p) / n) ** 0.5
