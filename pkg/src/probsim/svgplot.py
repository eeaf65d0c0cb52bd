"""Dependency-free SVG scatter plots for 2D embeddings."""

from __future__ import annotations

import numpy as np

_PALETTE = ("#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee", "#aa3377", "#bbbbbb")
_GLYPHS = ("circle", "square", "diamond", "triangle", "inv-triangle", "cross")

_WIDTH, _HEIGHT = 640, 480
_PLOT = (56.0, 16.0, 468.0, 432.0)  # x0, y0, x1, y1 of the data region


def _marker(glyph: str, cx: float, cy: float, color: str, r: float = 4.0, role: str = "marker") -> str:
    cls = f'class="{role}"'
    if glyph == "circle":
        return f'<circle {cls} cx="{cx:.2f}" cy="{cy:.2f}" r="{r:.1f}" fill="{color}"/>'
    if glyph == "square":
        return (
            f'<rect {cls} x="{cx - r:.2f}" y="{cy - r:.2f}" width="{2 * r:.1f}"'
            f' height="{2 * r:.1f}" fill="{color}"/>'
        )
    if glyph == "diamond":
        pts = f"{cx:.2f},{cy - r:.2f} {cx + r:.2f},{cy:.2f} {cx:.2f},{cy + r:.2f} {cx - r:.2f},{cy:.2f}"
        return f'<polygon {cls} points="{pts}" fill="{color}"/>'
    if glyph == "triangle":
        pts = f"{cx:.2f},{cy - r:.2f} {cx + r:.2f},{cy + r:.2f} {cx - r:.2f},{cy + r:.2f}"
        return f'<polygon {cls} points="{pts}" fill="{color}"/>'
    if glyph == "inv-triangle":
        pts = f"{cx:.2f},{cy + r:.2f} {cx + r:.2f},{cy - r:.2f} {cx - r:.2f},{cy - r:.2f}"
        return f'<polygon {cls} points="{pts}" fill="{color}"/>'
    path = (
        f"M {cx - r:.2f} {cy - r:.2f} L {cx + r:.2f} {cy + r:.2f} "
        f"M {cx - r:.2f} {cy + r:.2f} L {cx + r:.2f} {cy - r:.2f}"
    )
    return f'<path {cls} d="{path}" stroke="{color}" stroke-width="2" fill="none"/>'


def _axis_range(values: np.ndarray) -> tuple[float, float]:
    lo, hi = float(values.min()), float(values.max())
    if hi - lo < 1e-12:  # degenerate span: centre a unit window on the point
        lo, hi = lo - 0.5, hi + 0.5
    margin = 0.05 * (hi - lo)
    return lo - margin, hi + margin


def render_scatter(coords: np.ndarray, labels, title: str = "") -> str:
    """One marker per point, colour/glyph per problem, legend, 5% margins."""
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim != 2 or coords.shape[1] != 2 or len(coords) < 1:
        raise ValueError("coords must be a non-empty (n, 2) array")
    labels = list(labels)
    problems = sorted(set(labels))
    style = {p: (_PALETTE[i % len(_PALETTE)], _GLYPHS[i % len(_GLYPHS)]) for i, p in enumerate(problems)}

    x0, y0, x1, y1 = _PLOT
    xmin, xmax = _axis_range(coords[:, 0])
    ymin, ymax = _axis_range(coords[:, 1])

    def sx(v):
        return x0 + (v - xmin) / (xmax - xmin) * (x1 - x0)

    def sy(v):
        return y1 - (v - ymin) / (ymax - ymin) * (y1 - y0)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect x="0" y="0" width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<rect x="{x0}" y="{y0}" width="{x1 - x0}" height="{y1 - y0}" fill="none" '
        'stroke="#444444" stroke-width="1"/>',
    ]
    if title:
        parts.append(
            f'<text x="{(x0 + x1) / 2:.1f}" y="{y0 - 4:.1f}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13">{title}</text>'
        )
    for axis_val, anchor, tx, ty in (
        (xmin, "middle", sx(xmin), y1 + 16),
        (xmax, "middle", sx(xmax), y1 + 16),
        (ymin, "end", x0 - 4, sy(ymin) + 4),
        (ymax, "end", x0 - 4, sy(ymax) + 4),
    ):
        parts.append(
            f'<text x="{tx:.1f}" y="{ty:.1f}" text-anchor="{anchor}" '
            f'font-family="sans-serif" font-size="10">{axis_val:.3g}</text>'
        )
    for (x, y), label in zip(coords, labels):
        color, glyph = style[label]
        parts.append(_marker(glyph, sx(x), sy(y), color))
    lx, ly = x1 + 10.0, y0 + 10.0
    for i, p in enumerate(problems):
        color, glyph = style[p]
        cy = ly + 18.0 * i
        parts.append(f'<g class="legend-entry">{_marker(glyph, lx, cy, color, 4.0, role="legend-marker")}'
                     f'<text x="{lx + 10:.1f}" y="{cy + 4:.1f}" font-family="sans-serif" '
                     f'font-size="11">{p}</text></g>')
    parts.append("</svg>")
    return "\n".join(parts)
