from __future__ import annotations

import numpy as np

from windowshap.domain import Attribution
from windowshap.render import diverging_color, ranked_variables, render_heatmap_svg


def make_attr(points):
    points = np.asarray(points, dtype=np.float64)
    return Attribution(
        base_value=0.0,
        point_values=points,
        window_values=(),
        prediction=float(points.sum()),
        meta={"efficiency": "approximate"},
    )


def test_colors_are_monotone_in_value():
    scale = 2.0
    values = np.linspace(-2.5, 2.5, 41)
    colors = [diverging_color(float(v), scale) for v in values]
    reds = [c[0] for c in colors]
    blues = [c[2] for c in colors]
    assert all(a <= b for a, b in zip(reds, reds[1:]))
    assert all(a >= b for a, b in zip(blues, blues[1:]))
    assert diverging_color(0.0, scale) == (255, 255, 255)
    assert diverging_color(scale, scale) == (255, 0, 0)
    assert diverging_color(-scale, scale) == (0, 0, 255)


def test_all_zero_attribution_renders_uniform_midscale():
    attr = make_attr(np.zeros((3, 5)))
    svg = render_heatmap_svg(attr, ["a", "b", "c"])
    assert svg.count("rgb(255,255,255)") == 15
    assert svg.startswith("<svg")


def test_top_k_limits_rendered_rows():
    rng = np.random.default_rng(0)
    attr = make_attr(rng.normal(size=(20, 4)))
    names = [f"v{i}" for i in range(20)]
    svg = render_heatmap_svg(attr, names, top=15)
    assert svg.count('text-anchor="end"') == 15


def test_variables_ranked_by_total_magnitude():
    points = np.array([[0.1, 0.1], [5.0, -5.0], [1.0, 1.0]])
    attr = make_attr(points)
    assert ranked_variables(attr, top=3) == [1, 2, 0]


def test_render_is_deterministic():
    rng = np.random.default_rng(3)
    attr = make_attr(rng.normal(size=(4, 6)))
    names = [f"v{i}" for i in range(4)]
    assert render_heatmap_svg(attr, names) == render_heatmap_svg(attr, names)
