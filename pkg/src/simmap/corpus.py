"""Loading and indexing of co-occurrence data.

The canonical input is a sparse edge list (``id_a,id_b,count`` per line).
Item metadata (labels, weights, cluster tags) comes from an optional CSV.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import DataError


@dataclass(frozen=True)
class Item:
    id: str
    label: str
    weight: float
    cluster: Optional[int] = None

    def __post_init__(self):
        if not self.weight >= 0:
            raise DataError(f"item {self.id!r}: weight must be nonnegative, got {self.weight}")


@dataclass(frozen=True, eq=False)
class CoOccurrenceMatrix:
    """Symmetric nonnegative integer co-occurrence counts with zero diagonal.

    ``ids`` gives the item order; ``totals[i]`` is the sum of row ``i``.
    """

    ids: tuple
    counts: np.ndarray
    totals: np.ndarray = field(default=None)

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise DataError("counts must be a square matrix")
        if counts.shape[0] != len(self.ids):
            raise DataError("ids and counts disagree on the number of items")
        if len(set(self.ids)) != len(self.ids):
            raise DataError("item ids must be unique")
        if not np.issubdtype(counts.dtype, np.integer):
            if not np.all(np.equal(np.mod(counts, 1), 0)):
                raise DataError("counts must be integers")
        counts = counts.astype(np.int64)
        if np.any(counts < 0):
            raise DataError("counts must be nonnegative")
        if not np.array_equal(counts, counts.T):
            raise DataError("counts must be symmetric")
        if np.any(np.diag(counts) != 0):
            raise DataError("counts must have a zero diagonal")
        totals = counts.sum(axis=1)
        if self.totals is not None and not np.array_equal(np.asarray(self.totals), totals):
            raise DataError("stored totals do not match the row sums of counts")
        counts.setflags(write=False)
        totals.setflags(write=False)
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "totals", totals)

    @property
    def n(self) -> int:
        return len(self.ids)

    def index(self, item_id: str) -> int:
        return self.ids.index(item_id)

    def subset(self, indices: Sequence[int]) -> "CoOccurrenceMatrix":
        idx = np.asarray(indices, dtype=int)
        return CoOccurrenceMatrix(
            tuple(self.ids[i] for i in idx), self.counts[np.ix_(idx, idx)]
        )

    def __eq__(self, other):
        if not isinstance(other, CoOccurrenceMatrix):
            return NotImplemented
        return self.ids == other.ids and np.array_equal(self.counts, other.counts)


@dataclass(frozen=True)
class Corpus:
    """A co-occurrence matrix together with its item table (same order)."""

    matrix: CoOccurrenceMatrix
    items: tuple

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        if tuple(it.id for it in self.items) != self.matrix.ids:
            raise DataError("item table does not match matrix order")

    @classmethod
    def from_matrix(cls, matrix: CoOccurrenceMatrix) -> "Corpus":
        return cls(matrix, default_items(matrix))

    @property
    def n(self) -> int:
        return self.matrix.n

    @property
    def weights(self) -> np.ndarray:
        return np.array([it.weight for it in self.items], dtype=float)

    @property
    def clusters(self) -> Optional[list]:
        tags = [it.cluster for it in self.items]
        return None if all(t is None for t in tags) else tags

    def subset(self, indices: Sequence[int]) -> "Corpus":
        idx = list(indices)
        return Corpus(self.matrix.subset(idx), [self.items[i] for i in idx])


def default_items(matrix: CoOccurrenceMatrix) -> tuple:
    return tuple(
        Item(i, i, float(t)) for i, t in zip(matrix.ids, matrix.totals)
    )


def _read_text(path) -> str:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return fh.read()


def parse_edge_list(text: str) -> CoOccurrenceMatrix:
    """Parse edge-list text; see :func:`load_edge_list`."""
    index = {}
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3 or not parts[0] or not parts[1]:
            raise DataError(f"line {lineno}: expected 'id_a,id_b,count', got {raw!r}")
        a, b, count_text = parts
        try:
            count = int(count_text)
        except ValueError:
            raise DataError(f"line {lineno}: count {count_text!r} is not an integer") from None
        if count < 0:
            raise DataError(f"line {lineno}: negative count {count}")
        if a == b:
            raise DataError(f"line {lineno}: self-pair {a!r}")
        for item_id in (a, b):
            if item_id not in index:
                index[item_id] = len(index)
        i, j = index[a], index[b]
        key = (min(i, j), max(i, j))
        pairs[key] = pairs.get(key, 0) + count

    n = len(index)
    counts = np.zeros((n, n), dtype=np.int64)
    for (i, j), c in pairs.items():
        counts[i, j] = counts[j, i] = c
    return CoOccurrenceMatrix(tuple(index), counts)


def load_edge_list(path) -> Corpus:
    """Read an edge list into a corpus with default item metadata.

    Items appear in first-seen order, duplicate unordered pairs are summed,
    ``#`` lines are comments. Raises :class:`DataError` on malformed
    records, negative counts and self-pairs.
    """
    return Corpus.from_matrix(parse_edge_list(_read_text(path)))


def load_dense_matrix(path) -> Corpus:
    """Read a dense CSV matrix (header row of ids, one row per item)."""
    rows = list(csv.reader(io.StringIO(_read_text(path))))
    rows = [r for r in rows if r and not r[0].startswith("#")]
    if not rows:
        raise DataError("empty matrix file")
    ids = [h.strip() for h in rows[0]]
    body = rows[1:]
    if len(body) != len(ids):
        raise DataError(f"expected {len(ids)} matrix rows, got {len(body)}")
    try:
        counts = np.array([[int(v) for v in r] for r in body], dtype=np.int64)
    except ValueError as exc:
        raise DataError(f"non-integer matrix entry: {exc}") from None
    if counts.shape != (len(ids), len(ids)):
        raise DataError("matrix is not square")
    return Corpus.from_matrix(CoOccurrenceMatrix(tuple(ids), counts))


def format_edge_list(matrix: CoOccurrenceMatrix) -> str:
    """Edge-list text that reloads to the same matrix and item order.

    Zero-count records are emitted only where needed to introduce an item
    in its original position.
    """
    if matrix.n == 1:
        raise DataError("a single item cannot be written as an edge list")
    lines = []
    # Emit, for each item in order, its edges to earlier items; an item
    # without earlier partners gets a zero record to the previous item.
    for j in range(matrix.n):
        wrote = False
        for i in range(j):
            c = int(matrix.counts[i, j])
            if c > 0:
                lines.append(f"{matrix.ids[i]},{matrix.ids[j]},{c}")
                wrote = True
        if not wrote and j > 0:
            lines.append(f"{matrix.ids[j - 1]},{matrix.ids[j]},0")
    return "\n".join(lines) + ("\n" if lines else "")


def write_edge_list(matrix: CoOccurrenceMatrix, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_edge_list(matrix))


def load_items(path, corpus: Corpus) -> Corpus:
    """Attach labels, weights and cluster tags from an items CSV.

    The header must contain ``id``; ``label``, ``weight`` and ``cluster``
    are optional, as are empty cells. Unmentioned items keep their defaults.
    """
    reader = csv.DictReader(io.StringIO(_read_text(path)))
    if reader.fieldnames is None:
        return corpus
    fields = [f.strip() for f in reader.fieldnames]
    if "id" not in fields:
        raise DataError("items file header must contain an 'id' column")
    reader.fieldnames = fields
    position = {item_id: k for k, item_id in enumerate(corpus.matrix.ids)}
    items = list(corpus.items)
    seen = set()
    for lineno, row in enumerate(reader, start=2):
        item_id = (row.get("id") or "").strip()
        if item_id not in position:
            raise DataError(f"items file line {lineno}: unknown id {item_id!r}")
        if item_id in seen:
            raise DataError(f"items file line {lineno}: duplicate id {item_id!r}")
        seen.add(item_id)
        k = position[item_id]
        current = items[k]
        changes = {}
        label = (row.get("label") or "").strip()
        if label:
            changes["label"] = label
        weight = (row.get("weight") or "").strip()
        if weight:
            try:
                changes["weight"] = float(weight)
            except ValueError:
                raise DataError(f"items file line {lineno}: bad weight {weight!r}") from None
        cluster = (row.get("cluster") or "").strip()
        if cluster:
            try:
                changes["cluster"] = int(cluster)
            except ValueError:
                raise DataError(f"items file line {lineno}: bad cluster {cluster!r}") from None
        items[k] = replace(current, **changes)
    return Corpus(corpus.matrix, items)


def zero_pair_fraction(m: CoOccurrenceMatrix) -> float:
    """Fraction of unordered item pairs with no co-occurrences."""
    n = m.n
    if n < 2:
        raise DataError("zero_pair_fraction needs at least two items")
    iu = np.triu_indices(n, k=1)
    return float(np.count_nonzero(m.counts[iu] == 0) / (n * (n - 1) / 2))


def _largest_component_indices(adjacency: np.ndarray) -> np.ndarray:
    n = adjacency.shape[0]
    if n == 0:
        return np.arange(0)
    _, labels = connected_components(csr_matrix(adjacency > 0), directed=False)
    sizes = np.bincount(labels)
    candidates = np.flatnonzero(sizes == sizes.max())
    first_member = [int(np.flatnonzero(labels == c)[0]) for c in candidates]
    winner = candidates[int(np.argmin(first_member))]
    return np.flatnonzero(labels == winner)


def restrict_to_largest_component(m: CoOccurrenceMatrix):
    """Restrict to the largest connected component of the ``c_ij > 0`` graph.

    Returns ``(matrix, dropped_ids)``. Equal-size components are resolved in
    favour of the one containing the earliest item.
    """
    keep = _largest_component_indices(m.counts)
    if keep.size == m.n:
        return m, []
    kept = set(keep.tolist())
    dropped = [m.ids[i] for i in range(m.n) if i not in kept]
    return m.subset(keep), dropped


def restrict_corpus(corpus: Corpus):
    """Corpus-level :func:`restrict_to_largest_component`."""
    keep = _largest_component_indices(corpus.matrix.counts)
    kept = set(keep.tolist())
    dropped = [corpus.matrix.ids[i] for i in range(corpus.n) if i not in kept]
    if not dropped:
        return corpus, []
    return corpus.subset(keep), dropped


def drop_isolated(corpus: Corpus):
    """Remove items with ``c_i = 0``; returns ``(corpus, dropped_ids)``."""
    totals = corpus.matrix.totals
    keep = np.flatnonzero(totals > 0)
    dropped = [corpus.matrix.ids[i] for i in np.flatnonzero(totals == 0)]
    if not dropped:
        return corpus, []
    # dropped items share no counts with kept ones, so kept totals and
    # default weights are unchanged
    return corpus.subset(keep), dropped
