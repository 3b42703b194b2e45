"""Two-dimensional configurations and the helpers every engine shares."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

NDIM = 2


@dataclass
class Layout:
    """Item coordinates produced by one engine run.

    Attributes
    ----------
    coords : (n, 2) array
        Item locations, row ``i`` is ``x_i``.
    score : float
        Normalized stress for MDS, the weighted squared-distance objective
        for VOS.
    seed : int or None
        Seed of the random start that produced the layout.
    iterations : int
        Number of majorization steps taken.
    method : str
        Engine tag, e.g. ``"mds-ordinal"`` or ``"vos"``.
    history : list of float
        Value of the minimized function after every iteration (index 0 is
        the random start).
    start_index : int or None
        Position of the start within a multi-start batch.
    unscaled : (n, 2) array or None
        VOS only: the unconstrained optimum before rescaling.
    """

    coords: np.ndarray
    score: float = float("nan")
    seed: Optional[int] = None
    iterations: int = 0
    method: str = ""
    history: list = field(default_factory=list)
    start_index: Optional[int] = None
    unscaled: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return self.coords.shape[0]


def distance(a, b) -> float:
    """Euclidean distance between two points."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.sqrt(np.sum((a - b) ** 2)))


def pairwise_distances(x: np.ndarray) -> np.ndarray:
    diff = x[:, None, :] - x[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def pair_distances(x: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    diff = x[rows] - x[cols]
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def uniform_start(n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(-0.5, 0.5, size=(n, NDIM))


def derive_seed(master_seed: int, start_index: int) -> int:
    """Per-start seed, a pure function of ``(master_seed, start_index)``."""
    state = np.random.SeedSequence([int(master_seed), int(start_index)]).generate_state(1)
    return int(state[0])


def canonicalize(x: np.ndarray, anchor_weights=None) -> np.ndarray:
    """Center, rotate to principal axes and fix reflections.

    The first axis carries the largest variance. Each axis is then flipped so
    that the item with the largest anchor weight (first such item on ties)
    has a nonnegative coordinate on it.
    """
    x = np.asarray(x, dtype=float)
    x = x - x.mean(axis=0)
    n = x.shape[0]
    if n >= 2:
        cov = x.T @ x
        evals, evecs = np.linalg.eigh(cov)
        x = x @ evecs[:, np.argsort(evals)[::-1]]
    if anchor_weights is None:
        anchor = 0
    else:
        anchor = int(np.argmax(np.asarray(anchor_weights, dtype=float)))
    for k in range(x.shape[1]):
        if x[anchor, k] < 0:
            x[:, k] = -x[:, k]
    # avoid "-0.0" in serialized output
    return x + 0.0
