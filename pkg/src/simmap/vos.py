"""VOS layout: minimize ``sum s_ij d_ij^2`` subject to unit mean distance.

The production path minimizes the unconstrained function
``sigma_hat = sum s_ij d_ij^2 - 2 sum d_ij`` by majorization (weighted MDS
with dissimilarities ``1/s_ij`` and weights ``s_ij``) and rescales the result
onto the constraint. Optima of the two problems coincide up to scale, which
:func:`proposition1_check` verifies against an independent projected-gradient
solver of the constrained problem.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .diagnostics import procrustes_disparity
from .errors import ConfigError, DataError, NumericalError
from .layout import Layout, canonicalize, pair_distances, uniform_start
from .mds import laplacian_pinv, run_starts
from .similarity import SimilarityMatrix


@dataclass(frozen=True, eq=False)
class VosProblem:
    """Nonnegative similarities whose positive pairs form a connected graph."""

    similarities: np.ndarray

    def __post_init__(self):
        s = self.similarities
        if isinstance(s, SimilarityMatrix):
            s = s.values
        s = np.array(s, dtype=float)
        n = s.shape[0]
        if s.ndim != 2 or s.shape[1] != n:
            raise DataError("similarities must form a square matrix")
        if n < 2:
            raise DataError("VOS needs at least two items")
        np.fill_diagonal(s, 0.0)
        if not np.all(np.isfinite(s)) or np.any(s < 0):
            raise DataError("similarities must be finite and nonnegative")
        if not np.array_equal(s, s.T):
            raise DataError("similarities must be symmetric")
        isolated = np.flatnonzero(s.sum(axis=1) == 0)
        if isolated.size:
            raise DataError(
                f"item {int(isolated[0])} has zero similarity to every other item; "
                "the VOS objective is unbounded"
            )
        ncomp, _ = connected_components(csr_matrix(s > 0), directed=False)
        if ncomp > 1:
            raise DataError(
                f"similarity graph has {ncomp} components; the VOS objective is unbounded "
                "(restrict to the largest component)"
            )
        s.setflags(write=False)
        object.__setattr__(self, "similarities", s)

    @property
    def n(self) -> int:
        return self.similarities.shape[0]

    @cached_property
    def pairs(self):
        return np.triu_indices(self.n, k=1)

    @cached_property
    def pair_similarities(self) -> np.ndarray:
        rows, cols = self.pairs
        return self.similarities[rows, cols]

    @cached_property
    def vplus(self) -> np.ndarray:
        return laplacian_pinv(self.similarities)


@dataclass(frozen=True)
class VosScore:
    objective: float
    constraint_mean: float
    sigma_hat: float


def _coords(layout) -> np.ndarray:
    return np.asarray(layout.coords if isinstance(layout, Layout) else layout, dtype=float)


def _dist(problem: VosProblem, x: np.ndarray) -> np.ndarray:
    rows, cols = problem.pairs
    return pair_distances(x, rows, cols)


def vos_objective(problem: VosProblem, layout) -> float:
    """``sum_{i<j} s_ij * dist_ij^2``."""
    d = _dist(problem, _coords(layout))
    return float(np.dot(problem.pair_similarities, d * d))


def constraint_mean(layout) -> float:
    """Mean pairwise distance ``2 / (n (n-1)) * sum_{i<j} dist_ij``."""
    x = _coords(layout)
    n = x.shape[0]
    if n < 2:
        raise DataError("constraint_mean needs at least two items")
    rows, cols = np.triu_indices(n, k=1)
    return float(pair_distances(x, rows, cols).sum() * 2.0 / (n * (n - 1)))


def sigma_hat(problem: VosProblem, layout) -> float:
    """``sum s_ij dist_ij^2 - 2 sum dist_ij``; the second sum is unweighted."""
    d = _dist(problem, _coords(layout))
    return float(np.dot(problem.pair_similarities, d * d) - 2.0 * d.sum())


def sigma_hat_gradient(problem: VosProblem, layout) -> np.ndarray:
    """Analytic gradient of :func:`sigma_hat` (coincident pairs contribute 0)."""
    x = _coords(layout)
    diff = x[:, None, :] - x[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(dist > 0, 1.0 / np.where(dist > 0, dist, 1.0), 0.0)
    np.fill_diagonal(inv, 0.0)
    coef = 2.0 * problem.similarities - 2.0 * inv
    return np.einsum("ij,ijk->ik", coef, diff)


def score(problem: VosProblem, layout) -> VosScore:
    return VosScore(vos_objective(problem, layout), constraint_mean(layout), sigma_hat(problem, layout))


def ideal_location(problem: VosProblem, layout, i: int) -> np.ndarray:
    """Similarity-weighted centroid of all items other than ``i``."""
    x = _coords(layout)
    s = problem.similarities[i].copy()
    s[i] = 0.0
    total = s.sum()
    if total <= 0:
        raise DataError(f"item {i} has zero similarity to every other item")
    return s @ x / total


# --------------------------------------------------------------------------
# unconstrained majorization


def _majorize_step(problem: VosProblem, x: np.ndarray) -> np.ndarray:
    rows, cols = problem.pairs
    d = pair_distances(x, rows, cols)
    with np.errstate(divide="ignore"):
        inv = np.where(d > 0, 1.0 / np.where(d > 0, d, 1.0), 0.0)
    n = problem.n
    b = np.zeros((n, n))
    b[rows, cols] = -inv
    b[cols, rows] = -inv
    b[np.diag_indices(n)] = -b.sum(axis=1)
    return problem.vplus @ (b @ x)


def minimize_sigma_hat(problem: VosProblem, x0: np.ndarray, max_iter: int = 10000,
                       eps: float = 1e-10):
    """Majorize :func:`sigma_hat` from ``x0``.

    Returns ``(x, history, iterations)``; ``history[k]`` is the value after
    ``k`` steps.
    """
    x = np.array(x0, dtype=float)
    value = sigma_hat(problem, x)
    history = [value]
    it = 0
    for it in range(1, max_iter + 1):
        x = _majorize_step(problem, x)
        if not np.all(np.isfinite(x)):
            raise NumericalError(f"non-finite configuration at iteration {it}")
        new = sigma_hat(problem, x)
        if not np.isfinite(new):
            raise NumericalError(f"non-finite objective at iteration {it}")
        history.append(new)
        improvement = value - new
        value = new
        if improvement < eps * abs(value):
            break
    if constraint_mean(x) == 0:
        raise NumericalError("majorization collapsed all items onto one point")
    return x, history, it


def forward_scale(x: np.ndarray) -> float:
    """Factor that brings the mean pairwise distance of ``x`` to one."""
    return 1.0 / constraint_mean(x)


def vos_run(
    problem: VosProblem,
    seed: Optional[int] = None,
    max_iter: int = 10000,
    eps: float = 1e-10,
    init: Optional[np.ndarray] = None,
    anchor_weights=None,
) -> Layout:
    """One seeded VOS run.

    The unconstrained optimum is rescaled so the mean distance is exactly one
    and canonicalized. ``score`` is the weighted squared-distance objective of
    the returned coordinates; ``history`` tracks ``sigma_hat`` before
    rescaling. The unscaled configuration is kept as ``layout.unscaled``.
    """
    if max_iter < 1:
        raise ConfigError("max_iter must be at least 1")
    if not eps > 0:
        raise ConfigError("eps must be positive")
    if init is None:
        x0 = uniform_start(problem.n, np.random.default_rng(seed))
    else:
        x0 = np.array(init, dtype=float)
    x, history, it = minimize_sigma_hat(problem, x0, max_iter, eps)
    coords = canonicalize(x * forward_scale(x), anchor_weights)
    # canonicalization rotates and translates, so the mean stays one; one
    # more division removes rounding from the constraint
    coords = coords / constraint_mean(coords)
    return Layout(coords, score=vos_objective(problem, coords), seed=seed,
                  iterations=it, method="vos", history=history, unscaled=x)


def vos_multi_start(
    problem: VosProblem,
    n_starts: int = 100,
    master_seed: int = 1,
    max_iter: int = 10000,
    eps: float = 1e-10,
    anchor_weights=None,
    workers: int = 1,
    progress: Optional[Callable] = None,
) -> Layout:
    """Best of ``n_starts`` VOS runs by the objective under the constraint."""
    return run_starts(
        lambda seed: vos_run(problem, seed, max_iter, eps, anchor_weights=anchor_weights),
        n_starts, master_seed, workers, progress,
    )


# --------------------------------------------------------------------------
# independent constrained solver


def _mean_distance_gradient(x: np.ndarray) -> np.ndarray:
    n = x.shape[0]
    diff = x[:, None, :] - x[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(dist > 0, 1.0 / np.where(dist > 0, dist, 1.0), 0.0)
    np.fill_diagonal(inv, 0.0)
    return np.einsum("ij,ijk->ik", inv, diff) * (2.0 / (n * (n - 1)))


def _constrained_descent(problem: VosProblem, x: np.ndarray, max_iter: int, tol: float):
    """Projected gradient descent of the objective on the unit-mean-distance
    set; the projection is a uniform rescale.

    The step direction is the objective gradient minus its component along
    the constraint gradient (``grad V - 2 V grad M`` at ``M = 1``). Step
    lengths follow Barzilai-Borwein with a nonmonotone Armijo safeguard.
    """
    s = problem.similarities
    lap = np.diag(s.sum(axis=1)) - s

    def direction(x, f):
        return 2.0 * lap @ x - 2.0 * f * _mean_distance_gradient(x)

    x = x - x.mean(axis=0)
    x = x / constraint_mean(x)
    f = vos_objective(problem, x)
    grad = direction(x, f)
    step = 1.0 / (2.0 * np.linalg.eigvalsh(lap)[-1])
    recent = [f]
    stalled = 0
    for _ in range(max_iter):
        gnorm2 = float(np.sum(grad * grad))
        if gnorm2 <= (tol * f) ** 2:
            break
        reference = max(recent[-10:])
        t = step
        while True:
            y = x - t * grad
            m = constraint_mean(y)
            if m > 0:
                y = y / m
                fy = vos_objective(problem, y)
                if fy <= reference - 1e-4 * t * gnorm2:
                    break
            t *= 0.5
            if t < 1e-30:
                return x, f
        new_grad = direction(y, fy)
        ds = (y - x).ravel()
        dg = (new_grad - grad).ravel()
        curvature = float(ds @ dg)
        step = float(ds @ ds) / curvature if curvature > 0 else 2.0 * t
        # rounding keeps the gradient from vanishing; stop once progress
        # has been negligible for a while
        stalled = stalled + 1 if abs(f - fy) <= 1e-15 * f else 0
        x, f, grad = y, fy, new_grad
        recent.append(f)
        if stalled >= 20:
            break
    return x, f


def constrained_reference_solve(
    problem: VosProblem,
    seed: Optional[int] = None,
    n_starts: int = 10,
    max_iter: int = 20000,
    tol: float = 1e-11,
) -> Layout:
    """Minimize the objective directly under the unit-mean-distance constraint.

    Meant for verification on small problems. Each start draws a uniform
    configuration (redrawn if degenerate) and runs projected gradient
    descent; the best start is returned, centered but not rotated.
    """
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(n_starts):
        x0 = uniform_start(problem.n, rng)
        while constraint_mean(x0) == 0:
            x0 = uniform_start(problem.n, rng)
        x, f = _constrained_descent(problem, x0, max_iter, tol)
        if best is None or f < best[1]:
            best = (x, f)
    x, f = best
    return Layout(x - x.mean(axis=0), score=f, seed=seed, method="vos-reference")


@dataclass
class Proposition1Report:
    c_forward: float
    c_backward: float
    objective_gap: float
    sigma_hat_gap: float
    procrustes_disparity: float
    constraint_residual: float

    def as_dict(self) -> dict:
        return {
            "c_forward": self.c_forward,
            "c_backward": self.c_backward,
            "objective_gap": self.objective_gap,
            "sigma_hat_gap": self.sigma_hat_gap,
            "procrustes_disparity": self.procrustes_disparity,
            "constraint_residual": self.constraint_residual,
        }


def proposition1_check(
    problem: VosProblem,
    seed: int = 1,
    n_starts: int = 10,
    max_iter: int = 10000,
    eps: float = 1e-12,
) -> Proposition1Report:
    """Cross-check the unconstrained and constrained VOS problems.

    ``X`` is the best unconstrained optimum from majorization, ``Y`` the best
    constrained optimum from the reference solver.

    * ``c_forward = n(n-1) / (2 sum dist(X))`` puts ``X`` on the constraint;
      ``objective_gap`` compares the objective of ``c_forward X`` with ``Y``'s.
    * ``c_backward = 2 sum dist(Y*) / (n(n-1))`` where ``Y*`` is the
      unconstrained minimizer along the ray through ``Y``; ``c_backward Y``
      should reach the unconstrained optimum, and ``sigma_hat_gap`` compares
      its value with ``X``'s.

    When both solvers find the same optimum ``c_forward * c_backward = 1``.
    """
    x_layout = vos_multi_start(problem, n_starts, seed, max_iter, eps)
    x = x_layout.unscaled
    y = constrained_reference_solve(problem, seed, n_starts).coords
    npairs = problem.n * (problem.n - 1) / 2.0

    c_forward = forward_scale(x)
    u = c_forward * x
    obj_u = vos_objective(problem, u)
    obj_y = vos_objective(problem, y)

    # along the ray lambda * Y, sigma_hat = lambda^2 V(Y) - 2 lambda npairs mean(Y)
    lam = npairs * constraint_mean(y) / obj_y
    c_backward = constraint_mean(lam * y)
    sig_x = sigma_hat(problem, x)
    sig_v = sigma_hat(problem, c_backward * y)

    return Proposition1Report(
        c_forward=float(c_forward),
        c_backward=float(c_backward),
        objective_gap=abs(obj_u - obj_y) / abs(obj_y),
        sigma_hat_gap=abs(sig_v - sig_x) / abs(sig_x),
        procrustes_disparity=procrustes_disparity(y, u, allow_scaling=True),
        constraint_residual=abs(constraint_mean(u) - 1.0),
    )
