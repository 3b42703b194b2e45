"""Similarity measures for co-occurrence data."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .corpus import CoOccurrenceMatrix
from .errors import DataError


class Measure(str, enum.Enum):
    ASSOCIATION_STRENGTH = "association_strength"
    COSINE_INDIRECT = "cosine_indirect"


@dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    values: np.ndarray
    measure: Measure

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise DataError("similarities must form a square matrix")
        if not np.all(np.isfinite(v)):
            raise DataError("similarities must be finite")
        if np.any(v < 0):
            raise DataError("similarities must be nonnegative")
        if not np.array_equal(v, v.T):
            raise DataError("similarities must be symmetric")
        if np.any(np.diag(v) != 0):
            raise DataError("similarities must have a zero diagonal")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "measure", Measure(self.measure))

    @property
    def n(self) -> int:
        return self.values.shape[0]


def association_strength(m: CoOccurrenceMatrix) -> SimilarityMatrix:
    """``s_ij = c_ij / (c_i c_j)`` with totals taken over the full matrix."""
    totals = m.totals.astype(float)
    zero = np.flatnonzero(totals == 0)
    if zero.size:
        raise DataError(
            f"association strength undefined: item {m.ids[zero[0]]!r} has no co-occurrences"
        )
    s = m.counts.astype(float) / np.outer(totals, totals)
    np.fill_diagonal(s, 0.0)
    return SimilarityMatrix(s, Measure.ASSOCIATION_STRENGTH)


def cosine_indirect(m: CoOccurrenceMatrix) -> SimilarityMatrix:
    """Cosine of co-occurrence profiles, excluding the pair itself.

    For items ``i`` and ``j`` the sums run over ``k`` not in ``{i, j}``. A pair
    for which either restricted profile is all zero gets similarity 0.
    """
    c = m.counts.astype(float)
    sq = c * c
    # full sums minus the excluded k = i and k = j terms (c_ii = 0)
    dot = c @ c
    norm2 = sq.sum(axis=1)
    ni = norm2[:, None] - sq  # drop k = j from item i's profile
    nj = norm2[None, :] - sq  # drop k = i from item j's profile
    denom = np.sqrt(ni * nj)
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(denom > 0, dot / np.where(denom > 0, denom, 1.0), 0.0)
    s = np.clip(s, 0.0, 1.0)
    s = 0.5 * (s + s.T)
    np.fill_diagonal(s, 0.0)
    return SimilarityMatrix(s, Measure.COSINE_INDIRECT)


def to_dissimilarity(s: SimilarityMatrix):
    """Reciprocal dissimilarities ``1 / s_ij``.

    Returns ``(d, present)``: ``d`` holds ``1/s_ij`` where ``s_ij > 0`` and 0
    elsewhere; ``present`` is the boolean mask of pairs that carry a value.
    Absent pairs take weight 0 downstream.
    """
    v = s.values
    present = v > 0
    d = np.zeros_like(v)
    d[present] = 1.0 / v[present]
    return d, present
