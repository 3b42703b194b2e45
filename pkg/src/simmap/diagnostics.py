"""Map diagnostics: circularity, center-periphery bias, cluster separation
and Procrustes comparison of layouts."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.stats import spearmanr

from .errors import DataError


def _xy(layout) -> np.ndarray:
    return np.asarray(getattr(layout, "coords", layout), dtype=float)


def radii(layout) -> np.ndarray:
    x = _xy(layout)
    return np.linalg.norm(x - x.mean(axis=0), axis=1)


def circularity(layout) -> float:
    """Coefficient of variation of the distances to the centroid.

    0 means every point lies on one circle around the centroid.
    """
    x = _xy(layout)
    if x.shape[0] < 3:
        raise DataError("circularity needs at least three points")
    r = radii(x)
    mean = r.mean()
    if mean <= 0:
        raise DataError("circularity undefined: all points coincide")
    return float(r.std() / mean)


def center_periphery_correlation(layout, weights) -> Optional[float]:
    """Spearman correlation between item weight and distance to the centroid.

    Strongly negative values mean heavy items sit in the middle. Returns None
    when either ranking is constant.
    """
    x = _xy(layout)
    w = np.asarray(weights, dtype=float)
    if x.shape[0] < 3:
        raise DataError("center_periphery_correlation needs at least three points")
    if w.shape[0] != x.shape[0]:
        raise DataError("weights and layout differ in length")
    r = radii(x)
    if np.all(w == w[0]) or np.allclose(r, r[0], rtol=1e-12, atol=0):
        return None
    rho = spearmanr(w, r).statistic
    return None if not np.isfinite(rho) else float(rho)


def separation_ratio(layout, clusters: Sequence) -> float:
    """Mean between-cluster distance over mean within-cluster distance."""
    x = _xy(layout)
    tags = np.asarray(list(clusters), dtype=object)
    if tags.shape[0] != x.shape[0]:
        raise DataError("cluster tags and layout differ in length")
    labels, counts = np.unique(tags.astype(str), return_counts=True)
    if labels.size < 2:
        raise DataError("separation_ratio needs at least two clusters")
    if counts.min() < 2:
        small = labels[np.argmin(counts)]
        raise DataError(f"cluster {small!r} has fewer than two members")
    rows, cols = np.triu_indices(x.shape[0], k=1)
    d = np.linalg.norm(x[rows] - x[cols], axis=1)
    same = tags[rows] == tags[cols]
    within = d[same].mean()
    if within <= 0:
        raise DataError("separation_ratio undefined: zero within-cluster distance")
    return float(d[~same].mean() / within)


def procrustes_fit(a, b, allow_scaling: bool = True) -> np.ndarray:
    """Return ``b`` translated, rotated/reflected (and optionally scaled) to
    best match ``a`` in the least-squares sense."""
    a = _xy(a)
    b = _xy(b)
    if a.shape != b.shape:
        raise DataError("layouts differ in shape")
    a0 = a - a.mean(axis=0)
    b0 = b - b.mean(axis=0)
    u, sv, vt = np.linalg.svd(b0.T @ a0)
    rot = u @ vt
    scale = 1.0
    if allow_scaling:
        bb = np.sum(b0 * b0)
        scale = sv.sum() / bb if bb > 0 else 0.0
    return scale * b0 @ rot + a.mean(axis=0)


def procrustes_disparity(a, b, allow_scaling: bool = True) -> float:
    """RMS residual after optimal superimposition of ``b`` onto ``a``,
    relative to the RMS radius of ``a``."""
    a = _xy(a)
    a0 = a - a.mean(axis=0)
    rms_a = np.sqrt(np.mean(np.sum(a0 * a0, axis=1)))
    if rms_a <= 0:
        raise DataError("procrustes_disparity undefined: reference layout has zero radius")
    fitted = procrustes_fit(a, b, allow_scaling)
    resid = np.sqrt(np.mean(np.sum((a - fitted) ** 2, axis=1)))
    return float(resid / rms_a)


@dataclass
class DiagnosticsReport:
    circularity: Optional[float] = None
    center_periphery_corr: Optional[float] = None
    separation_ratio: Optional[float] = None
    procrustes_disparity: Optional[float] = None

    def as_dict(self) -> dict:
        return {
            "circularity": self.circularity,
            "center_periphery_corr": self.center_periphery_corr,
            "separation_ratio": self.separation_ratio,
            "procrustes_disparity": self.procrustes_disparity,
        }


def diagnose(layout, weights=None, clusters=None, reference=None) -> DiagnosticsReport:
    """Compute every diagnostic that the available metadata allows.

    Measures that are undefined for the layout (fewer than three points, all
    points coincident) are reported as None.
    """
    report = DiagnosticsReport()
    if _xy(layout).shape[0] < 3:
        return report
    try:
        report.circularity = circularity(layout)
    except DataError:
        pass
    if weights is not None:
        report.center_periphery_corr = center_periphery_correlation(layout, weights)
    if clusters is not None and all(c is not None for c in clusters):
        try:
            report.separation_ratio = separation_ratio(layout, clusters)
        except DataError:
            report.separation_ratio = None
    if reference is not None:
        report.procrustes_disparity = procrustes_disparity(reference, layout)
    return report
