"""Exit criteria for the package, one test (and one PASS/FAIL summary line) per criterion.

Run alone with ``pytest tests/test_acceptance.py -v``; the corpus fits take a few minutes.
"""

import time

import numpy as np
import pytest

from conftest import random_blob_field
from glyphfield.cli import main
from glyphfield.exact_sdf import ContourSamples, SdfGrid, compute_grid_sdf, nearest_params, nearest_curve_signs
from glyphfield.exact_sdf import sample_contour_sdf, signed_distances
from glyphfield.fit import FitConfig, LossWeights, Objective, fit
from glyphfield.glyph_ir import GlyphOutline, parse_svg, rasterize, write_svg
from glyphfield.metrics import aggregate
from glyphfield.pipeline import RunConfig, corpus_paths, prepare
from glyphfield.pseudo_field import Field, curve_values, field_mask, render, shade
from glyphfield.vectorize import vectorize

pytestmark = pytest.mark.acceptance


# --------------------------------------------------------------------------
# shared corpus fits


@pytest.fixture(scope="session")
def corpus_fits():
    """Full-loss and image-only fits of every bundled glyph at the default settings."""
    cfg = RunConfig()
    out = {}
    for path in corpus_paths():
        outline = parse_svg(path.read_bytes())
        grid, contour, target = prepare(outline, cfg)
        row = {"outline": outline}
        for label, weights in (("full", cfg.weights()), ("image", LossWeights(grid=0.0, contour=0.0))):
            t0 = time.perf_counter()
            field, report = fit(target, grid, contour, weights, cfg.fit_config())
            row[label] = (field, report, time.perf_counter() - t0)
        out[path.stem] = row
    return out


# --------------------------------------------------------------------------


def test_exact_sdf_oracle(verdict):
    rng = np.random.default_rng(2024)
    curves = rng.uniform(-1, 1, (100, 3, 2))
    points = rng.uniform(-1.5, 1.5, (100, 2))
    t0 = time.perf_counter()
    _, d2 = nearest_params(curves, points)
    elapsed = time.perf_counter() - t0
    mine = np.sqrt(d2)  # (points, curves)

    t = np.linspace(0.0, 1.0, 100_001)
    u = 1.0 - t
    worst = 0.0
    for k, c in enumerate(curves):
        px = u * u * c[0, 0] + 2 * t * u * c[1, 0] + t * t * c[2, 0]
        py = u * u * c[0, 1] + 2 * t * u * c[1, 1] + t * t * c[2, 1]
        for i in range(0, 100, 25):
            q = points[i:i + 25]
            sweep = np.sqrt(((px[None] - q[:, :1]) ** 2 + (py[None] - q[:, 1:]) ** 2).min(axis=1))
            worst = max(worst, float(np.abs(sweep - mine[i:i + 25, k]).max()))
    ok = worst <= 1e-6 and elapsed < 10.0
    verdict("exact SDF vs 1e5-step sweep", ok, f"max |diff| {worst:.2e}, analytic {elapsed:.3f}s")
    assert ok


def test_gradient_suite(verdict):
    t0 = time.perf_counter()
    errors = []
    for seed in range(20):
        rng = np.random.default_rng(seed)
        truth = random_blob_field(rng, 2, 3)
        grid = SdfGrid(16, 16, np.zeros((16, 16)))
        g_true = curve_values(truth.params, *grid.points().T).max(axis=1).min(axis=0)
        grid = SdfGrid(16, 16, g_true.reshape(16, 16))
        xy = rng.uniform(-1, 1, (64, 2))
        d = curve_values(truth.params, xy[:, 0], xy[:, 1]).max(axis=1).min(axis=0)
        contour = ContourSamples(xy, d)
        gamma = 0.2  # wide enough that 16x16 pixel centers fall inside the transition band
        obj = Objective(shade(grid.samples, gamma), grid, contour, LossWeights(), gamma)
        theta = random_blob_field(rng, 2, 3).params
        theta = theta + rng.normal(0, 0.05, theta.shape)
        _, grad = obj(theta)
        h = 1e-5
        fd = np.zeros_like(theta)
        for idx in np.ndindex(theta.shape):
            up, dn = theta.copy(), theta.copy()
            up[idx] += h
            dn[idx] -= h
            fd[idx] = (obj(up, False)[0].total - obj(dn, False)[0].total) / (2 * h)
        errors.append(np.linalg.norm(grad - fd) / max(np.linalg.norm(fd), 1e-300))
    elapsed = time.perf_counter() - t0
    worst = max(errors)
    ok = worst < 1e-3 and elapsed < 30.0
    verdict("loss gradient vs central differences", ok, f"worst rel err {worst:.2e} over 20 configs, {elapsed:.1f}s")
    assert ok


def test_render_boundary_identities(verdict):
    gamma = 0.02
    exact = shade(-gamma, gamma) == 0.0 and shade(0.0, gamma) == 0.5 and shade(gamma, gamma) == 1.0
    g = np.sort(np.random.default_rng(0).uniform(-3 * gamma, 3 * gamma, 10_000))
    monotone = bool(np.all(np.diff(shade(g, gamma)) >= 0))
    ok = exact and monotone
    verdict("render boundary identities and monotonicity", ok, f"identities {exact}, monotone {monotone}")
    assert ok


def test_self_expressible_round_trip(verdict):
    t0 = time.perf_counter()
    ious = []
    for trial in range(20):
        rng = np.random.default_rng(1000 + trial)
        truth = random_blob_field(rng, 4, 4)
        target = render(truth)
        outline = GlyphOutline(vectorize(truth).merged)
        grid = compute_grid_sdf(outline, 128, 128)
        contour = sample_contour_sdf(outline, 4000, 0.03, trial)
        init = Field(truth.params + rng.normal(0, 0.01, truth.params.shape))
        _, report = fit(target, grid, contour, LossWeights(), FitConfig(steps=2000, n_p=4, n_a=4), init=init)
        ious.append(report.metrics.iou)
    elapsed = time.perf_counter() - t0
    good = sum(i >= 0.99 for i in ious)
    ok = good >= 18 and elapsed < 300
    verdict("self-expressible round trip", ok, f"{good}/20 trials IoU >= 0.99, min {min(ious):.4f}, {elapsed:.0f}s")
    assert ok


def test_desk_scale_reconstruction(verdict, corpus_fits):
    reports = [row["full"][1].metrics for row in corpus_fits.values()]
    slowest = max(row["full"][2] for row in corpus_fits.values())
    agg = aggregate(reports)
    l1, iou, psnr = agg["l1"]["mean"], agg["iou"]["mean"], agg["psnr"]["mean"]
    ok = l1 <= 0.02 and iou >= 0.95 and psnr >= 22.0 and slowest <= 300
    for name, row in corpus_fits.items():
        print(f"  {name}: {row['full'][1].metrics.csv()}")
    verdict(
        "mini-corpus reconstruction",
        ok,
        f"mean L1 {l1:.4f}, IoU {iou:.4f}, PSNR {psnr:.2f} dB; slowest fit {slowest:.0f}s",
    )
    assert ok


def test_ablation_direction(verdict, corpus_fits):
    full = np.mean([row["full"][1].metrics.iou for row in corpus_fits.values()])
    image = np.mean([row["image"][1].metrics.iou for row in corpus_fits.values()])
    ok = image < full
    verdict("ablation: image-only mean IoU below full loss", ok, f"image-only {image:.4f} vs full {full:.4f}")
    assert ok


def _zero_set_distance(params, pts):
    k, p, q, d, e, f = (params[:, i][:, None] for i in range(6))
    x, y = pts[:, 0][None], pts[:, 1][None]
    s = p * x + q * y
    H = k * s * s + d * x + e * y + f
    dist = np.abs(H) / np.hypot(2 * k * s * p + d, 2 * k * s * q + e)
    edge = np.minimum(np.abs(np.abs(pts[:, 0]) - 1), np.abs(np.abs(pts[:, 1]) - 1))
    return np.minimum(dist.min(axis=0), edge)


def test_vectorization_fidelity(verdict, corpus_fits):
    worst_iou, worst_dev = 1.0, 0.0
    t = np.linspace(0, 1, 33)
    for name, row in corpus_fits.items():
        field = row["full"][0]
        result = vectorize(field)
        svg = write_svg(result.merged, 512)
        curves = parse_svg(svg).curves_array() if result.merged else np.zeros((0, 3, 2))
        a, b = rasterize(curves, 512), field_mask(field, 512)
        iou = np.count_nonzero(a & b) / max(np.count_nonzero(a | b), 1)
        worst_iou = min(worst_iou, iou)
        pts = np.array([c.point(s) for con in result.merged for c in con.curves for s in t])
        dev = float(_zero_set_distance(field.normalized().params.reshape(-1, 6), pts).max())
        worst_dev = max(worst_dev, dev)
    ok = worst_iou >= 0.99 and worst_dev <= 1e-6
    verdict("vectorization fidelity", ok, f"min IoU {worst_iou:.5f} at 512^2, max off-curve {worst_dev:.1e}")
    assert ok


def test_sign_robustness(verdict, corpus):
    rng = np.random.default_rng(7)
    mismatches, checked = 0, 0
    for outline in corpus.values():
        pts = rng.uniform(-1, 1, (10_000, 2))
        d = signed_distances(outline, pts)
        keep = np.abs(d) > 0.02
        mismatches += int(np.count_nonzero(nearest_curve_signs(outline, pts)[keep] != np.sign(d[keep])))
        checked += int(keep.sum())
    ok = mismatches == 0
    verdict("nearest-curve sign vs winding sign", ok, f"{mismatches} mismatches over {checked} points")
    assert ok


def test_determinism(verdict, tmp_path):
    glyph = next(p for p in corpus_paths() if p.stem == "serif_o")
    outputs = []
    for run in ("a", "b"):
        d = tmp_path / run
        d.mkdir()
        assert main(["sdf-gen", str(glyph), str(d / "g"), "--seed", "3"]) == 0
        assert main(["fit", str(d / "g"), str(d / "f"), "--seed", "3", "--steps", "300"]) == 0
        assert main(["vectorize", str(d / "f.pfd"), str(d / "f.svg")]) == 0
        outputs.append([(d / n).read_bytes() for n in ("g.sdf", "g.sdc", "f.pfd", "f.svg")])
    ok = outputs[0] == outputs[1]
    verdict("deterministic sdf-gen/fit/vectorize", ok, "byte-identical" if ok else "outputs differ")
    assert ok
