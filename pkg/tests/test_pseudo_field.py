import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_blob_field
from glyphfield.errors import FormatError, ShapeMismatch
from glyphfield.pseudo_field import (
    Field,
    ParabolicCurve,
    RenderConfig,
    curve_values,
    eval_field,
    eval_primitive,
    field_mask,
    field_values,
    interpolate,
    read_pgm,
    render,
    render_gradient,
    shade,
    shade_derivative,
    write_pgm,
)

finite = st.floats(-3, 3, allow_nan=False)


def test_curve_value():
    c = ParabolicCurve(2.0, 1.0, 0.0, 0.0, -1.0, 0.5)
    # x = y^2-style parabola rotated: 2 x^2 - y + 0.5
    assert c.as_array().tolist() == [2.0, 1.0, 0.0, 0.0, -1.0, 0.5]
    np.testing.assert_allclose(curve_values(c.as_array(), [0.5], [1.0]), [0.0])


def test_primitive_max_and_tie_break():
    a = ParabolicCurve(0, 0, 0, 1, 0, 0)
    b = ParabolicCurve(0, 0, 0, 1, 0, 0)
    v, j = eval_primitive([a, b], 0.3, 0.0)
    assert v == pytest.approx(0.3) and j == 0


def test_field_min_and_tie_break():
    prim = [ParabolicCurve(0, 0, 0, 0, 0, -1.0)]
    f = Field.from_curves([prim, prim])
    assert eval_field(f, 0.0, 0.0) == (-1.0, 0, 0)
    g, sel = field_values(f.params, np.array([0.0]), np.array([0.0]))
    assert g[0] == -1.0 and sel[0] == 0


def test_kernel_matches_numpy():
    rng = np.random.default_rng(5)
    f = Field(rng.normal(size=(3, 4, 6)))
    xs, ys = rng.uniform(-1, 1, (2, 500))
    g, sel = field_values(f.params, xs, ys)
    H = curve_values(f.params, xs, ys)  # (3, 4, 500)
    np.testing.assert_allclose(g, H.max(axis=1).min(axis=0), atol=1e-12)
    i, j = np.divmod(sel, 4)
    np.testing.assert_allclose(H[i, j, np.arange(500)], g, atol=1e-12)


def test_shade_boundary_identities():
    gamma = 0.02
    assert shade(-gamma, gamma) == 0.0
    assert shade(0.0, gamma) == 0.5
    assert shade(gamma, gamma) == 1.0


@given(st.floats(-0.1, 0.1), st.floats(-0.1, 0.1))
def test_shade_monotone(a, b):
    lo, hi = min(a, b), max(a, b)
    assert shade(lo) <= shade(hi)


@given(st.floats(-0.019, 0.019))
def test_shade_derivative_matches_difference(g):
    h = 1e-7
    fd = (shade(g + h) - shade(g - h)) / (2 * h)
    assert shade_derivative(g) == pytest.approx(float(fd), rel=1e-5, abs=1e-5)


def test_render_shape_and_background():
    empty = Field(np.array([[[0, 0, 0, 0, 0, 1.0]]]))
    img = render(empty, RenderConfig(width=20, height=10))
    assert img.shape == (10, 20) and np.all(img == 1.0)


def test_render_band_width_at_high_resolution():
    f = random_blob_field(np.random.default_rng(1))
    size, gamma = 512, 0.02
    img = render(f, RenderConfig(gamma, size, size))
    grey = (img > 0) & (img < 1)
    width = int(np.ceil(2 * gamma / (2 / size))) + 1
    # a scanline through a smooth boundary crosses the grey band only briefly
    runs = []
    for row in grey:
        edges = np.flatnonzero(np.diff(np.concatenate([[0], row.astype(int), [0]])))
        runs += list(edges[1::2] - edges[::2])
    assert np.median(runs) <= width


def test_render_gradient_matches_difference():
    rng = np.random.default_rng(8)
    f = random_blob_field(rng, 2, 3)
    cfg = RenderConfig(0.05, 24, 24)
    w = rng.normal(size=(24, 24))
    grad = render_gradient(f, cfg, w)
    h = 1e-6
    p = f.params.copy()
    for idx in [(0, 0, 0), (0, 1, 3), (1, 2, 5), (1, 0, 1)]:
        up, dn = p.copy(), p.copy()
        up[idx] += h
        dn[idx] -= h
        fd = (np.sum(w * render(Field(up), cfg)) - np.sum(w * render(Field(dn), cfg))) / (2 * h)
        assert grad[idx] == pytest.approx(fd, rel=1e-4, abs=1e-6)


@settings(max_examples=25)
@given(st.lists(finite, min_size=6, max_size=6))
def test_normalized_preserves_values(vals):
    f = Field(np.array(vals, dtype=float).reshape(1, 1, 6))
    xs, ys = np.linspace(-1, 1, 7), np.linspace(1, -1, 7)
    np.testing.assert_allclose(
        field_values(f.normalized().params, xs, ys)[0], field_values(f.params, xs, ys)[0], atol=1e-9
    )


def test_interpolate_endpoints_and_errors():
    rng = np.random.default_rng(0)
    a, b = Field(rng.normal(size=(2, 3, 6))), Field(rng.normal(size=(2, 3, 6)))
    assert np.array_equal(interpolate(a, b, 0.0).params, a.params)
    assert np.array_equal(interpolate(a, b, 1.0).params, b.params)
    assert np.array_equal(interpolate(a, a, 0.5).params, a.params)
    with pytest.raises(ShapeMismatch):
        interpolate(a, Field(rng.normal(size=(1, 3, 6))), 0.5)


def test_pfd_round_trip_and_errors():
    f = Field(np.random.default_rng(1).normal(size=(2, 3, 6)).astype(np.float32))
    assert np.array_equal(Field.from_bytes(f.to_bytes()).params, f.params)
    for bad in [b"", b"PFD1 2\n", b"PFD1 1 1\n" + b"\0" * 10, b"PFD1 x 1\n"]:
        with pytest.raises(FormatError):
            Field.from_bytes(bad)
    with pytest.raises(ShapeMismatch):
        Field(np.zeros((2, 6)))


def test_pgm_round_trip():
    img = np.array([[0.0, 0.5, 1.0], [1 / 255, 0.25, 0.998]])
    data = write_pgm(img)
    assert data.startswith(b"P5\n3 2\n255\n")
    back = read_pgm(data)
    np.testing.assert_allclose(back, np.floor(img * 255 + 0.5) / 255)
    with pytest.raises(FormatError):
        read_pgm(b"P2\n1 1\n255\n\0")
    with pytest.raises(FormatError):
        read_pgm(b"P5\n2 2\n255\n\0")


def test_field_mask_matches_render():
    f = random_blob_field(np.random.default_rng(3))
    assert np.array_equal(field_mask(f, 64), render(f, RenderConfig(width=64, height=64)) < 0.5)
