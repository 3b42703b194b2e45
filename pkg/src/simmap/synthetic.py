"""Synthetic co-occurrence corpora with known structure."""

from __future__ import annotations

import numpy as np

from .corpus import CoOccurrenceMatrix, Corpus, Item


def _symmetric_counts(rng, n, rate, density):
    """Poisson counts on a random subset of pairs, symmetric, zero diagonal."""
    upper = np.triu((rng.uniform(size=(n, n)) < density) * rng.poisson(rate, size=(n, n)), 1)
    return upper + upper.T


def random_connected_counts(n: int, density: float = 0.4, rate: float = 4.0, seed=None) -> np.ndarray:
    """Random sparse count matrix whose positive pairs form a connected graph.

    A random spanning path guarantees connectivity; other pairs are positive
    with probability ``density``.
    """
    rng = np.random.default_rng(seed)
    c = _symmetric_counts(rng, n, rate, density)
    perm = rng.permutation(n)
    for a, b in zip(perm[:-1], perm[1:]):
        if c[a, b] == 0:
            c[a, b] = c[b, a] = 1 + rng.poisson(rate)
    return c


def two_block_corpus(
    block_size: int = 50,
    within_density: float = 0.5,
    within_rate: float = 5.0,
    between_density: float = 0.01,
    between_rate: float = 1.0,
    heavy_fraction: float = 0.2,
    heavy_factor: float = 4.0,
    seed=None,
) -> Corpus:
    """Two planted blocks of items: dense counts inside, sparse across.

    A ``heavy_fraction`` of the items in each block gets its pair rates
    multiplied by ``heavy_factor``, so item totals are skewed as in real
    co-occurrence data. Items carry cluster tags 0 and 1.
    """
    rng = np.random.default_rng(seed)
    n = 2 * block_size
    block = np.repeat([0, 1], block_size)
    activity = np.where(rng.uniform(size=n) < heavy_fraction, heavy_factor, 1.0)
    same = block[:, None] == block[None, :]
    density = np.where(same, within_density, between_density)
    rate = np.where(same, within_rate, between_rate) * np.sqrt(np.outer(activity, activity))
    mask = rng.uniform(size=(n, n)) < density
    counts = np.triu(mask * rng.poisson(rate), 1)
    counts = counts + counts.T
    # one guaranteed cross link so the association graph is connected
    if not np.any(counts[:block_size, block_size:]):
        counts[0, block_size] = counts[block_size, 0] = 1
    for i in range(n):
        if counts[i].sum() == 0:
            j = (i + 1) % block_size + (block_size if block[i] else 0)
            counts[i, j] = counts[j, i] = 1
    ids = tuple(f"b{block[i]}_{i:03d}" for i in range(n))
    matrix = CoOccurrenceMatrix(ids, counts)
    items = [Item(ids[i], ids[i], float(matrix.totals[i]), int(block[i])) for i in range(n)]
    return Corpus(matrix, items)
