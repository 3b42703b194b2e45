"""Matplotlib figures for map documents and method comparisons."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .svg import cluster_color

STYLE = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.linewidth": 0.6,
}


def _draw_map(ax, items, title=None):
    if not items:
        ax.set_axis_off()
        return
    x = np.array([it.x for it in items])
    y = np.array([it.y for it in items])
    w = np.array([it.weight for it in items], dtype=float)
    top = w.max() if w.max() > 0 else 1.0
    # marker area proportional to weight, so the radius follows sqrt(weight)
    sizes = 4.0 + 120.0 * w / top
    colors = [cluster_color(it.cluster) for it in items]
    order = np.argsort(-w, kind="stable")
    ax.scatter(x[order], y[order], s=sizes[order], c=[colors[k] for k in order],
               alpha=0.8, linewidths=0.3, edgecolors="white")
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xticks([])
    ax.set_yticks([])
    if title:
        ax.set_title(title)


def _save(fig, path):
    path = Path(path)
    FigureCanvasAgg(fig)
    metadata = {"Software": None} if path.suffix.lower() == ".png" else None
    fig.savefig(path, dpi=150, metadata=metadata)


def plot_document(doc, path, title=None) -> None:
    """Render one map document to an image file."""
    import matplotlib

    with matplotlib.rc_context(STYLE):
        fig = Figure(figsize=(5, 5))
        ax = fig.add_subplot(1, 1, 1)
        _draw_map(ax, doc.items, title or f"{doc.method} ({doc.similarity})")
        fig.tight_layout()
        _save(fig, path)


def plot_comparison(docs: dict, path) -> None:
    """Side-by-side panels, one per method, titled with score and circularity.

    ``docs`` maps a panel name to ``(MapDocument, diagnostics dict)``.
    """
    import matplotlib

    with matplotlib.rc_context(STYLE):
        fig = Figure(figsize=(4.0 * len(docs), 4.3))
        for k, (name, (doc, diag)) in enumerate(docs.items(), start=1):
            ax = fig.add_subplot(1, len(docs), k)
            circ = diag.get("circularity")
            circ = "NA" if circ is None else f"{circ:.3f}"
            subtitle = f"score {doc.score:.3g}, circularity {circ}"
            _draw_map(ax, doc.items, f"{name}\n{subtitle}")
        fig.tight_layout()
        _save(fig, path)
