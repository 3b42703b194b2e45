"""Weighted SMACOF multidimensional scaling in two dimensions.

Three transformation families are supported: ratio (``d = b p``), interval
(``d = a + b p``) and ordinal (any monotone function, ties kept tied). Each
iteration fits disparities to the current distances and then applies the
Guttman transform, so the normalized raw stress never increases.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import ConfigError, DataError, NumericalError
from .layout import (
    Layout,
    canonicalize,
    derive_seed,
    distance,
    pair_distances,
    uniform_start,
)

__all__ = [
    "MdsProblem",
    "Disparities",
    "distance",
    "normalized_stress",
    "monotone_regression",
    "fit_transformation",
    "guttman_update",
    "smacof_run",
    "multi_start",
]

log = logging.getLogger(__name__)

FAMILIES = ("ratio", "interval", "ordinal")
KINDS = ("similarity", "dissimilarity")


@dataclass(frozen=True, eq=False)
class MdsProblem:
    """Proximities, weights and transformation family for one MDS fit.

    Parameters
    ----------
    proximities : (n, n) array
        Symmetric similarities or dissimilarities; the diagonal is ignored.
    kind : {"similarity", "dissimilarity"}
    family : {"ratio", "interval", "ordinal"}
    weights : (n, n) array, optional
        Nonnegative symmetric pair weights. Defaults to 1 off the diagonal.
    """

    proximities: np.ndarray
    kind: str = "dissimilarity"
    family: str = "ordinal"
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        p = np.array(self.proximities, dtype=float)
        n = p.shape[0]
        if p.ndim != 2 or p.shape[1] != n:
            raise DataError("proximities must form a square matrix")
        if n < 2:
            raise DataError("MDS needs at least two items")
        if self.kind not in KINDS:
            raise DataError(f"unknown proximity kind {self.kind!r}")
        if self.family not in FAMILIES:
            raise DataError(f"unknown transformation family {self.family!r}")
        if self.family == "ratio" and self.kind == "similarity":
            raise DataError("ratio MDS is undefined for similarities; use interval or ordinal")
        if self.weights is None:
            w = np.ones((n, n))
        else:
            w = np.array(self.weights, dtype=float)
            if w.shape != (n, n):
                raise DataError("weights must match the proximity matrix")
        np.fill_diagonal(w, 0.0)
        np.fill_diagonal(p, 0.0)
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(w))):
            raise DataError("proximities and weights must be finite")
        if np.any(w < 0):
            raise DataError("weights must be nonnegative")
        if not (np.array_equal(p, p.T) and np.array_equal(w, w.T)):
            raise DataError("proximities and weights must be symmetric")
        if not np.any(w > 0):
            raise DataError("at least one weight must be positive")
        ncomp, _ = connected_components(csr_matrix(w > 0), directed=False)
        if ncomp > 1:
            raise DataError("the graph of positively weighted pairs is disconnected")
        p.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "proximities", p)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.proximities.shape[0]

    @cached_property
    def pairs(self):
        """Row/column indices of the pairs ``i < j`` with positive weight."""
        rows, cols = np.triu_indices(self.n, k=1)
        keep = self.weights[rows, cols] > 0
        return rows[keep], cols[keep]

    @cached_property
    def pair_weights(self) -> np.ndarray:
        rows, cols = self.pairs
        return self.weights[rows, cols]

    @cached_property
    def pair_proximities(self) -> np.ndarray:
        rows, cols = self.pairs
        return self.proximities[rows, cols]

    @cached_property
    def oriented(self) -> np.ndarray:
        """Proximities turned into an increasing-with-distance scale."""
        p = self.pair_proximities
        return p if self.kind == "dissimilarity" else -p

    @cached_property
    def tie_blocks(self):
        """Sort order of the oriented proximities and tie-block boundaries."""
        return _tie_blocks(self.oriented)

    @cached_property
    def unit_weights(self) -> bool:
        return bool(np.all(self.pair_weights == 1.0)) and self.pair_weights.size == self.n * (self.n - 1) // 2

    @cached_property
    def vplus(self) -> np.ndarray:
        """Moore-Penrose inverse of the weight Laplacian."""
        return laplacian_pinv(self.weights)

    def pair_matrix(self, values: np.ndarray) -> np.ndarray:
        """Scatter a pair vector into a symmetric matrix."""
        out = np.zeros((self.n, self.n))
        rows, cols = self.pairs
        out[rows, cols] = values
        out[cols, rows] = values
        return out

    def pair_vector(self, matrix: np.ndarray) -> np.ndarray:
        rows, cols = self.pairs
        return np.asarray(matrix, dtype=float)[rows, cols]


@dataclass
class Disparities:
    """Transformed proximities ``f(p_ij)`` as a symmetric matrix.

    ``intercept`` and ``slope`` are reported for the metric families and are
    None for ordinal fits. They describe the fit before normalization;
    ``scale`` is the normalization factor applied afterwards.
    """

    values: np.ndarray
    intercept: Optional[float] = None
    slope: Optional[float] = None
    scale: float = 1.0


def laplacian_pinv(weights: np.ndarray) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    n = w.shape[0]
    lap = np.diag(w.sum(axis=1)) - w
    ones = np.full((n, n), 1.0 / n)
    return np.linalg.inv(lap + ones) - ones


def _as_pairs(problem: MdsProblem, disparities) -> np.ndarray:
    if isinstance(disparities, Disparities):
        disparities = disparities.values
    d = np.asarray(disparities, dtype=float)
    if d.ndim == 2:
        return problem.pair_vector(d)
    return d


def _coords(layout) -> np.ndarray:
    return np.asarray(layout.coords if isinstance(layout, Layout) else layout, dtype=float)


def normalized_stress(problem: MdsProblem, disparities, layout) -> float:
    """Normalized raw stress of a layout against disparities.

    ``sum w (dhat - dist)^2 / sum w dhat^2`` over pairs ``i < j``.
    """
    dhat = _as_pairs(problem, disparities)
    x = _coords(layout)
    rows, cols = problem.pairs
    dist = pair_distances(x, rows, cols)
    return _stress(problem.pair_weights, dhat, dist)


def _stress(w, dhat, dist) -> float:
    denom = float(np.dot(w, dhat * dhat))
    if denom <= 0:
        raise NumericalError("stress undefined: all disparities are zero")
    r = dhat - dist
    return float(np.dot(w, r * r)) / denom


# --------------------------------------------------------------------------
# monotone regression


def _tie_blocks(keys: np.ndarray):
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]
    starts = np.flatnonzero(np.r_[True, sorted_keys[1:] != sorted_keys[:-1]])
    return order, starts


def _pava(y: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Weighted least-squares nondecreasing fit of an ordered sequence."""
    vals, wts, sizes = [], [], []
    for v, wt in zip(y.tolist(), w.tolist()):
        sz = 1
        while vals and vals[-1] >= v:
            pv, pw = vals.pop(), wts.pop()
            tw = pw + wt
            # zero-weight blocks carry no information; average them plainly
            v = (pv * pw + v * wt) / tw if tw > 0 else 0.5 * (pv + v)
            wt = tw
            sz += sizes.pop()
        vals.append(v)
        wts.append(wt)
        sizes.append(sz)
    return np.repeat(np.array(vals), sizes)


def _blocked_monotone(d, w, order, starts):
    """Monotone fit where tied keys (given as sort ``order``/``starts``)
    share one value."""
    ds = d[order]
    ws = w[order]
    wsum = np.add.reduceat(ws, starts)
    wd = np.add.reduceat(ws * ds, starts)
    counts = np.diff(np.r_[starts, ds.size])
    with np.errstate(invalid="ignore", divide="ignore"):
        means = np.where(wsum > 0, wd / np.where(wsum > 0, wsum, 1.0),
                         np.add.reduceat(ds, starts) / counts)
    fitted_blocks = _pava(means, wsum)
    out = np.empty_like(d)
    out[order] = np.repeat(fitted_blocks, counts)
    return out


def monotone_regression(targets, weights=None, proximities=None, decreasing=False) -> np.ndarray:
    """Weighted monotone (isotonic) regression by pool-adjacent-violators.

    Parameters
    ----------
    targets : sequence of float
        Values to fit (distances).
    weights : sequence of float, optional
        Nonnegative weights, default 1.
    proximities : sequence of float, optional
        Keys that order the targets. When given, the fit is nondecreasing in
        the key and tied keys receive one common fitted value. When omitted,
        the targets are taken to be in order already.
    decreasing : bool
        Fit nonincreasing in the key instead (similarity proximities).

    Returns
    -------
    ndarray
        Fitted values, in the positions of ``targets``.
    """
    d = np.asarray(targets, dtype=float).ravel()
    if d.size == 0:
        raise DataError("monotone_regression needs at least one value")
    w = np.ones_like(d) if weights is None else np.asarray(weights, dtype=float).ravel()
    if w.shape != d.shape:
        raise DataError("weights and targets differ in length")
    if np.any(w < 0):
        raise DataError("weights must be nonnegative")
    if proximities is None:
        keys = np.arange(d.size, dtype=float)
    else:
        keys = np.asarray(proximities, dtype=float).ravel()
        if keys.shape != d.shape:
            raise DataError("proximities and targets differ in length")
    if decreasing:
        keys = -keys
    order, starts = _tie_blocks(keys)
    return _blocked_monotone(d, w, order, starts)


# --------------------------------------------------------------------------
# transformation fits


def _fit_pairs(problem: MdsProblem, dist: np.ndarray, normalize: bool = True):
    """Project distances onto the family's cone of admissible disparities.

    Returns ``(dhat, intercept, slope, scale)``.
    """
    w = problem.pair_weights
    q = problem.oriented
    intercept = slope = None
    if problem.family == "ratio":
        pp = float(np.dot(w, q * q))
        slope = max(float(np.dot(w, q * dist)) / pp, 0.0) if pp > 0 else 0.0
        intercept = 0.0
        dhat = slope * q
    elif problem.family == "interval":
        dhat, a, b = _interval_fit(q, dist, w)
        # report in terms of the raw proximities: dhat = a + b p
        intercept, slope = a, (b if problem.kind == "dissimilarity" else -b)
    else:
        order, starts = problem.tie_blocks
        dhat = _blocked_monotone(dist, w, order, starts)

    scale = 1.0
    if normalize:
        target = float(np.dot(w, dist * dist))
        current = float(np.dot(w, dhat * dhat))
        if current > 0 and target > 0:
            scale = np.sqrt(target / current)
            dhat = dhat * scale
    return dhat, intercept, slope, scale


def _interval_fit(q, y, w):
    """Weighted least squares ``y ~ a + b q`` with ``b >= 0`` and the fitted
    values nonnegative.

    Writing the fit as ``alpha + b (q - min q)`` both constraints become
    ``alpha >= 0, b >= 0``; the two-variable nonnegative least-squares
    problem is solved by checking its active sets.
    """
    u = q - q.min()
    sw = w.sum()
    candidates = []
    # both free
    mu = np.dot(w, u) / sw
    my = np.dot(w, y) / sw
    suu = np.dot(w, (u - mu) ** 2)
    if suu > 0:
        b = np.dot(w, (u - mu) * (y - my)) / suu
        alpha = my - b * mu
        if b >= 0 and alpha >= 0:
            candidates.append((alpha, b))
    # b = 0
    candidates.append((max(my, 0.0), 0.0))
    # alpha = 0
    uu = np.dot(w, u * u)
    if uu > 0:
        candidates.append((0.0, max(np.dot(w, u * y) / uu, 0.0)))
    best = None
    for alpha, b in candidates:
        r = y - alpha - b * u
        loss = np.dot(w, r * r)
        if best is None or loss < best[0]:
            best = (loss, alpha, b)
    _, alpha, b = best
    return alpha + b * u, alpha - b * q.min(), b


def fit_transformation(problem: MdsProblem, layout, normalize: bool = True) -> Disparities:
    """Fit the family's transformation of the proximities to a layout.

    Ratio fits a nonnegative slope, interval an affine map with the slope
    oriented by the proximity kind and nonnegative disparities, ordinal a
    monotone regression with ties kept tied. With ``normalize`` (the default)
    the disparities are rescaled so ``sum w dhat^2 = sum w dist^2``.
    """
    x = _coords(layout)
    rows, cols = problem.pairs
    dist = pair_distances(x, rows, cols)
    dhat, a, b, scale = _fit_pairs(problem, dist, normalize)
    return Disparities(problem.pair_matrix(dhat), intercept=a, slope=b, scale=scale)


# --------------------------------------------------------------------------
# majorization


def _guttman(problem: MdsProblem, dhat: np.ndarray, x: np.ndarray) -> np.ndarray:
    rows, cols = problem.pairs
    dist = pair_distances(x, rows, cols)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(dist > 0, problem.pair_weights * dhat / np.where(dist > 0, dist, 1.0), 0.0)
    n = problem.n
    b = np.zeros((n, n))
    b[rows, cols] = -ratio
    b[cols, rows] = -ratio
    b[np.diag_indices(n)] = -b.sum(axis=1)
    bx = b @ x
    if problem.unit_weights:
        return bx / n
    return problem.vplus @ bx


def guttman_update(problem: MdsProblem, disparities, layout) -> Layout:
    """One weighted Guttman transform: the minimizer of the stress majorizer
    at the current configuration. Coincident points contribute nothing."""
    x = _coords(layout)
    dhat = _as_pairs(problem, disparities)
    new = _guttman(problem, dhat, x)
    base = layout if isinstance(layout, Layout) else Layout(x)
    return Layout(new, seed=base.seed, iterations=base.iterations + 1, method=base.method)


def _method_tag(problem: MdsProblem) -> str:
    return f"mds-{problem.family}"


def smacof_run(
    problem: MdsProblem,
    seed: Optional[int] = None,
    max_iter: int = 10000,
    eps: float = 1e-8,
    init: Optional[np.ndarray] = None,
    anchor_weights=None,
) -> Layout:
    """Minimize normalized raw stress from one random start.

    Alternates :func:`fit_transformation` and :func:`guttman_update` until the
    relative stress improvement drops below ``eps`` or ``max_iter`` steps were
    taken. The start is uniform on ``[-0.5, 0.5]^2`` unless ``init`` is given.
    The returned layout is canonicalized; ``history`` holds the stress after
    every iteration.
    """
    if max_iter < 1:
        raise ConfigError("max_iter must be at least 1")
    if not eps > 0:
        raise ConfigError("eps must be positive")
    if init is None:
        x = uniform_start(problem.n, np.random.default_rng(seed))
    else:
        x = np.array(init, dtype=float)
        if x.shape != (problem.n, 2):
            raise DataError("init must have shape (n, 2)")
    rows, cols = problem.pairs
    w = problem.pair_weights

    # stress uses disparities scaled to the current distances; the Guttman
    # step uses them scaled to a fixed norm. Both give the same sequence of
    # shapes, but the fixed norm keeps the configuration from shrinking
    # geometrically toward underflow.
    anchor = np.sqrt(w.sum())

    def step_target(dhat):
        norm = np.sqrt(np.dot(w, dhat * dhat))
        return dhat * (anchor / norm) if norm > 0 else dhat

    dist = pair_distances(x, rows, cols)
    dhat = _fit_pairs(problem, dist)[0]
    stress = _stress(w, dhat, dist)
    history = [stress]
    it = 0
    for it in range(1, max_iter + 1):
        x = _guttman(problem, step_target(dhat), x)
        dist = pair_distances(x, rows, cols)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(dist))):
            raise NumericalError(f"non-finite configuration at iteration {it}")
        dhat = _fit_pairs(problem, dist)[0]
        new = _stress(w, dhat, dist)
        if not np.isfinite(new):
            raise NumericalError(f"non-finite stress at iteration {it}")
        history.append(new)
        improvement = stress - new
        stress = new
        if improvement < eps * stress or stress < 1e-15:
            break
    coords = canonicalize(x, anchor_weights)
    return Layout(coords, score=stress, seed=seed, iterations=it,
                  method=_method_tag(problem), history=history)


def multi_start(
    problem: MdsProblem,
    n_starts: int = 100,
    master_seed: int = 1,
    max_iter: int = 10000,
    eps: float = 1e-8,
    anchor_weights=None,
    workers: int = 1,
    progress: Optional[Callable[[int, Layout], None]] = None,
) -> Layout:
    """Best of ``n_starts`` seeded runs (lowest stress, then lowest index)."""
    return run_starts(
        lambda seed: smacof_run(problem, seed, max_iter, eps, anchor_weights=anchor_weights),
        n_starts, master_seed, workers, progress,
    )


def run_starts(run, n_starts, master_seed, workers=1, progress=None) -> Layout:
    """Execute ``run(seed)`` for every start and merge deterministically."""
    if n_starts < 1:
        raise ConfigError("n_starts must be at least 1")
    seeds = [derive_seed(master_seed, k) for k in range(n_starts)]

    def job(k):
        layout = run(seeds[k])
        layout.start_index = k
        if progress is not None:
            progress(k, layout)
        return layout

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, range(n_starts)))
    else:
        results = [job(k) for k in range(n_starts)]
    best = None
    for layout in results:
        if best is None or layout.score < best.score:
            best = layout
    log.debug("best start %d of %d, score %.6g", best.start_index, n_starts, best.score)
    return best
