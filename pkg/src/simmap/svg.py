"""Deterministic SVG rendering of map documents.

Circles mark items, their radius grows with the square root of the item
weight, fill color encodes the cluster tag. The output depends only on the
document and the options, so identical inputs give identical bytes.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape, quoteattr

from .errors import ConfigError
from .mapdoc import MapDocument

# tab10; items without a cluster tag are grey
PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)
NO_CLUSTER = "#b0b0b0"
MARGIN = 0.05


def _fmt(v: float) -> str:
    text = f"{v:.2f}"
    return "0.00" if text == "-0.00" else text


def cluster_color(cluster) -> str:
    if cluster is None:
        return NO_CLUSTER
    return PALETTE[int(cluster) % len(PALETTE)]


def circle_radii(weights, min_radius: float, max_radius: float) -> list:
    """Radius proportional to ``sqrt(weight)``, the heaviest item gets
    ``max_radius``; nothing is drawn smaller than ``min_radius``."""
    top = max(weights, default=0.0)
    if top <= 0:
        return [min_radius for _ in weights]
    return [max(min_radius, max_radius * math.sqrt(w / top)) for w in weights]


def render_svg(doc: MapDocument, width: int = 1000, labels: int = 25,
               min_radius: float = 2.0, max_radius: float = 20.0) -> str:
    if width <= 0:
        raise ConfigError("width must be positive")
    if labels < 0:
        raise ConfigError("labels must be nonnegative")
    if not 0 < min_radius <= max_radius:
        raise ConfigError("radii must satisfy 0 < min_radius <= max_radius")
    height = width
    items = doc.items
    margin = MARGIN * width
    inner = width - 2 * margin
    xs = [it.x for it in items]
    ys = [it.y for it in items]
    if items:
        cx = (min(xs) + max(xs)) / 2.0
        cy = (min(ys) + max(ys)) / 2.0
        extent = max(max(xs) - min(xs), max(ys) - min(ys))
    else:
        cx = cy = extent = 0.0
    scale = inner / extent if extent > 0 else 0.0

    def px(x, y):
        # map y upward
        return width / 2.0 + (x - cx) * scale, height / 2.0 - (y - cy) * scale

    radii = circle_radii([it.weight for it in items], min_radius, max_radius)
    # heavy items first so light ones stay visible on top
    order = sorted(range(len(items)), key=lambda k: (-items[k].weight, k))

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
        '<g stroke="#ffffff" stroke-width="0.5" fill-opacity="0.8">',
    ]
    for k in order:
        it = items[k]
        x, y = px(it.x, it.y)
        out.append(
            f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(radii[k])}" '
            f'fill="{cluster_color(it.cluster)}"><title>{escape(it.label)}</title></circle>'
        )
    out.append("</g>")
    if labels and items:
        out.append('<g font-family="sans-serif" font-size="12" text-anchor="middle" fill="#222222">')
        for k in order[:labels]:
            it = items[k]
            x, y = px(it.x, it.y)
            out.append(
                f'<text x="{_fmt(x)}" y="{_fmt(y - radii[k] - 2)}" '
                f'data-id={quoteattr(it.id)}>{escape(it.label)}</text>'
            )
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def export_svg(doc: MapDocument, path, **options) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_svg(doc, **options))
