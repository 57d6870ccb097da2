import math

import numpy as np
import pytest
from matplotlib.path import Path as MplPath

from glyphfield.exact_sdf import unsigned_distance
from glyphfield.errors import DegenerateBox, EmptyPath, OpenContour, UnsupportedCommand
from glyphfield.glyph_ir import (
    Contour,
    GlyphOutline,
    QuadBezier,
    cubic_to_quadratics,
    normalize,
    parse_path_data,
    parse_svg,
    pixel_centers,
    rasterize,
    winding_numbers,
    write_svg,
)

SQUARE_SVG = '<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 100 100"><path d="M 25 25 L 75 25 L 75 75 L 25 75 Z"/></svg>'


def _svg(d, vb="0 0 100 100"):
    return f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{vb}"><path d="{d}"/></svg>'


def test_square_parses_to_normalized_ccw_contour():
    out = parse_svg(SQUARE_SVG)
    out.check()
    (c,) = out.contours
    assert len(c.curves) == 4
    assert c.signed_area() == pytest.approx(1.0)
    pts = out.curves_array()
    assert pts.min() == pytest.approx(-0.5) and pts.max() == pytest.approx(0.5)


def test_hole_is_clockwise_regardless_of_source_direction():
    d = "M 10 10 L 90 10 L 90 90 L 10 90 Z M 30 30 L 70 30 L 70 70 L 30 70 Z"
    out = parse_svg(_svg(d))
    areas = sorted(c.signed_area() for c in out.contours)
    assert areas[0] < 0 < areas[1]


def test_relative_and_shorthand_commands_match_absolute():
    a = parse_svg(_svg("M 10 10 Q 50 0 90 10 T 90 90 L 10 90 Z"))
    b = parse_svg(_svg("m 10 10 q 40 -10 80 0 t 0 80 h -80 z"))
    np.testing.assert_allclose(a.curves_array(), b.curves_array(), atol=1e-12)


def test_cubic_is_approximated_within_tolerance():
    p = [(0.0, 0.0), (0.2, 1.0), (0.8, -1.0), (1.0, 0.0)]
    quads = cubic_to_quadratics(*p, tol=1e-3)
    t = np.linspace(0, 1, 2001)
    cubic = ((1 - t) ** 3)[:, None] * p[0] + (3 * t * (1 - t) ** 2)[:, None] * p[1]
    cubic += (3 * t * t * (1 - t))[:, None] * p[2] + (t**3)[:, None] * p[3]
    dense = np.concatenate([[q.point(s) for s in np.linspace(0, 1, 200)] for q in quads])
    # every cubic point is near the quadratic chain (Hausdorff one way)
    gap = np.min(np.linalg.norm(cubic[:, None] - dense[None], axis=2), axis=1)
    assert gap.max() < 2e-3
    for a, b in zip(quads, quads[1:]):
        assert a.p2 == b.p0


@pytest.mark.parametrize("d,exc", [
    ("M 0 0 A 5 5 0 0 1 10 10 Z", UnsupportedCommand),
    ("M 0 0 L 10 0 L 10 10", OpenContour),
])
def test_path_errors(d, exc):
    with pytest.raises(exc):
        parse_path_data(d)


def test_svg_without_paths_is_empty():
    with pytest.raises(EmptyPath):
        parse_svg('<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 10 10"></svg>')


def test_degenerate_em_box():
    out = parse_svg(SQUARE_SVG)
    with pytest.raises(DegenerateBox):
        normalize(out, (0, 0, 0, 5))


def test_transform_attribute_applies():
    plain = parse_svg(_svg("M 25 25 L 75 25 L 75 75 L 25 75 Z"))
    moved = parse_svg(
        '<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 100 100">'
        '<g transform="translate(10 0)"><path d="M 15 25 L 65 25 L 65 75 L 15 75 Z"/></g></svg>'
    )
    np.testing.assert_allclose(plain.curves_array(), moved.curves_array(), atol=1e-12)


def test_signed_area_of_curved_contour_matches_polygon_limit():
    c = Contour([QuadBezier((1.0, 0.0), (1.0, 1.0), (0.0, 1.0)), QuadBezier.line((0.0, 1.0), (1.0, 0.0))])
    t = np.linspace(0, 1, 200001)
    pts = np.array([c.curves[0].point(s) for s in t])
    x, y = pts[:, 0], pts[:, 1]
    poly = 0.5 * np.sum(x[:-1] * y[1:] - x[1:] * y[:-1]) + 0.5 * (x[-1] * y[0] - x[0] * y[-1])
    assert c.signed_area() == pytest.approx(poly, abs=1e-9)


def test_pixel_centers_orientation():
    X, Y = pixel_centers(4, 2)
    assert X[0, 0] == pytest.approx(-0.75) and Y[0, 0] == pytest.approx(0.5)
    assert Y[1, 0] == pytest.approx(-0.5)


def _flat_winding(outline, pts, n=64):
    """Winding number as the orientation-signed sum of per-ring polygon containment."""
    t = np.linspace(0.0, 1.0, n, endpoint=False)
    w = np.zeros(len(pts), dtype=int)
    for c in outline.contours:
        ring = np.concatenate([[q.point(s) for s in t] for q in c.curves])
        x, y = ring[:, 0], ring[:, 1]
        area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
        w += int(np.sign(area)) * MplPath(ring).contains_points(pts)
    return w


def test_winding_matches_flattened_oracle_on_corpus(corpus):
    rng = np.random.default_rng(11)
    for name, outline in corpus.items():
        pts = rng.uniform(-1, 1, size=(3000, 2))
        curves = outline.curves_array()
        far = unsigned_distance(curves, pts) > 1e-4
        mine = winding_numbers(curves, pts)
        assert np.array_equal(mine[far], _flat_winding(outline, pts)[far]), name


def test_rasterize_agrees_with_winding(corpus):
    outline = corpus["sans_O"]
    curves = outline.curves_array()
    mask = rasterize(curves, 64, 64)
    X, Y = pixel_centers(64, 64)
    ref = winding_numbers(curves, np.stack([X.ravel(), Y.ravel()], 1)).reshape(64, 64) != 0
    assert np.array_equal(mask, ref)


def test_write_svg_round_trip(corpus):
    outline = corpus["serif_o"]
    text = write_svg(outline.contours, 128)
    assert "fill-rule=\"nonzero\"" in text
    back = parse_svg(text)
    a = rasterize(outline.curves_array(), 256)
    b = rasterize(back.curves_array(), 256)
    assert np.mean(a != b) < 1e-3
    assert sorted(round(c.signed_area(), 4) for c in back.contours) == pytest.approx(
        sorted(round(c.signed_area(), 4) for c in outline.contours), abs=1e-4
    )


def test_corpus_has_holes_and_bowls(corpus):
    assert len(corpus) == 10
    holes = [n for n, o in corpus.items() if any(c.signed_area() < 0 for c in o.contours)]
    assert holes
    for o in corpus.values():
        o.check()
        assert not math.isclose(sum(c.signed_area() for c in o.contours), 0.0)
