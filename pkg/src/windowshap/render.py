"""Deterministic SVG heatmaps of per-cell attribution values.

Variables go on the y axis sorted by total absolute value (descending,
capped at a top-k), time steps on the x axis, with a diverging color scale
centered at zero: negative values shade toward blue, positive toward red.
The SVG is assembled by hand so identical attributions yield identical bytes.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .domain import Attribution

CELL_W = 12
CELL_H = 18
MARGIN_LEFT = 140
MARGIN_TOP = 24
MARGIN_BOTTOM = 28


def diverging_color(value: float, scale: float) -> tuple[int, int, int]:
    """Map a value in [-scale, scale] to a blue-white-red RGB triple.

    The red channel is non-decreasing and the blue channel non-increasing in
    the value, so cell colors are monotone in the attribution.
    """
    t = 0.0 if scale <= 0 else min(1.0, max(-1.0, value / scale))
    red = round(255 * (1.0 - max(-t, 0.0)))
    green = round(255 * (1.0 - abs(t)))
    blue = round(255 * (1.0 - max(t, 0.0)))
    return red, green, blue


def ranked_variables(attr: Attribution, top: int) -> list[int]:
    """Variable indices by total absolute attribution, largest first."""
    totals = np.abs(attr.point_values).sum(axis=1)
    order = sorted(range(len(totals)), key=lambda i: (-totals[i], i))
    return order[: max(1, top)]


def render_heatmap_svg(attr: Attribution, variable_names, top: int = 15) -> str:
    rows = ranked_variables(attr, top)
    n_steps = attr.point_values.shape[1]
    scale = float(np.abs(attr.point_values).max())
    width = MARGIN_LEFT + n_steps * CELL_W + 16
    height = MARGIN_TOP + len(rows) * CELL_H + MARGIN_BOTTOM

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    for row, variable in enumerate(rows):
        y = MARGIN_TOP + row * CELL_H
        label = escape(str(variable_names[variable]))
        parts.append(
            f'<text x="{MARGIN_LEFT - 6}" y="{y + CELL_H - 5}" text-anchor="end" '
            f'font-family="monospace" font-size="11">{label}</text>'
        )
        for t in range(n_steps):
            r, g, b = diverging_color(float(attr.point_values[variable, t]), scale)
            x = MARGIN_LEFT + t * CELL_W
            parts.append(
                f'<rect x="{x}" y="{y}" width="{CELL_W}" height="{CELL_H}" '
                f'fill="rgb({r},{g},{b})"/>'
            )
    tick_every = max(1, n_steps // 10)
    axis_y = MARGIN_TOP + len(rows) * CELL_H
    for t in range(0, n_steps, tick_every):
        x = MARGIN_LEFT + t * CELL_W
        parts.append(
            f'<text x="{x}" y="{axis_y + 14}" font-family="monospace" '
            f'font-size="10">{t}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
