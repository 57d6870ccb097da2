"""Exact signed distances from points to quadratic-Bézier outlines.

Negative inside, positive outside, in normalized units. The unsigned part
comes from the closed-form nearest point on each curve; the glyph-level sign
comes from the nonzero winding number, which stays well defined at corners.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from glyphfield.errors import FormatError, ZeroTangent
from glyphfield.glyph_ir import GlyphOutline, QuadBezier, pixel_centers, winding_numbers
from glyphfield.roots import solve_cubic

DEFAULT_BAND = 0.03
DEFAULT_CONTOUR_SAMPLES = 4000


@dataclass(frozen=True)
class SdfSample:
    x: float
    y: float
    d: float


@dataclass(frozen=True)
class SdfGrid:
    width: int
    height: int
    samples: np.ndarray  # (height, width) float, row 0 = top

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float).reshape(self.height, self.width)
        object.__setattr__(self, "samples", s)

    def points(self) -> np.ndarray:
        X, Y = pixel_centers(self.width, self.height)
        return np.stack([X.ravel(), Y.ravel()], axis=1)


@dataclass(frozen=True)
class ContourSamples:
    xy: np.ndarray  # (m, 2)
    d: np.ndarray  # (m,)

    def __len__(self) -> int:
        return len(self.d)

    @property
    def samples(self) -> list[SdfSample]:
        return [SdfSample(float(x), float(y), float(d)) for (x, y), d in zip(self.xy, self.d)]


# --------------------------------------------------------------------------
# nearest point


def _coefficients(curves: np.ndarray, points: np.ndarray):
    """Cubic coefficients of d/dt |P(t)-q|^2 / 4, shaped ``(N, K)``."""
    P0 = curves[None, :, 0, :]
    A = curves[None, :, 1, :] - P0
    B = curves[None, :, 2, :] - 2 * curves[None, :, 1, :] + P0
    M = P0 - points[:, None, :]
    a = np.sum(B * B, axis=-1)
    b = 3 * np.sum(A * B, axis=-1)
    c = 2 * np.sum(A * A, axis=-1) + np.sum(M * B, axis=-1)
    d = np.sum(M * A, axis=-1)
    a, b, c, d = np.broadcast_arrays(a, b, c, d)
    return a, b, c, d


def _eval(curves, t):
    """Points on curves ``(K,3,2)`` at parameters ``t`` of shape ``(N,K)``."""
    u = 1 - t
    return (
        (u * u)[..., None] * curves[None, :, 0]
        + (2 * t * u)[..., None] * curves[None, :, 1]
        + (t * t)[..., None] * curves[None, :, 2]
    )


def nearest_params(curves: np.ndarray, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nearest parameter and squared distance for every (point, curve) pair.

    Candidates are the real roots of the derivative cubic clamped to [0, 1]
    plus both endpoints; the minimal-distance candidate wins, ties going to
    the smaller ``t``. Returns arrays of shape ``(N, K)``.
    """
    curves = np.asarray(curves, dtype=float).reshape(-1, 3, 2)
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    roots = solve_cubic(*_coefficients(curves, points))
    n, k = roots.shape[:2]
    cand = np.concatenate([np.zeros((n, k, 1)), np.clip(roots, 0.0, 1.0), np.ones((n, k, 1))], axis=2)
    cand = np.where(np.isfinite(cand), cand, 0.0)
    # sort so argmin's first-hit rule breaks ties toward smaller t
    cand = np.sort(cand, axis=2)
    best_t = np.empty((n, k))
    best_d2 = np.full((n, k), np.inf)
    for j in range(cand.shape[2]):
        t = cand[:, :, j]
        diff = _eval(curves, t) - points[:, None, :]
        d2 = np.sum(diff * diff, axis=-1)
        better = d2 < best_d2
        best_d2 = np.where(better, d2, best_d2)
        best_t = np.where(better, t, best_t)
    return best_t, best_d2


def nearest_t(curve: QuadBezier, q) -> float:
    """Parameter in [0, 1] of the point on ``curve`` closest to ``q``."""
    t, _ = nearest_params(curve.as_array()[None], np.array([q], dtype=float))
    return float(t[0, 0])


def _tangent(curve: np.ndarray, t: float) -> np.ndarray:
    v = 2 * (1 - t) * (curve[1] - curve[0]) + 2 * t * (curve[2] - curve[1])
    if np.hypot(*v) > 1e-14:
        return v
    # cusp at an endpoint whose control point coincides with it
    v = curve[2] - curve[0]
    if np.hypot(*v) > 1e-14:
        return v
    raise ZeroTangent("curve has no usable tangent")


def curve_signed_distance(curve: QuadBezier, q) -> float:
    """Distance to one curve, signed by the cross product with its tangent.

    Negative when ``q`` lies to the left of the direction of travel.
    """
    arr = curve.as_array()
    t = nearest_t(curve, q)
    foot = np.array(curve.point(t))
    w = np.asarray(q, dtype=float) - foot
    v = _tangent(arr, t)
    dist = float(np.hypot(*w))
    cross = w[0] * v[1] - w[1] * v[0]
    if cross == 0.0:
        return 0.0 if dist == 0.0 else dist
    return math.copysign(dist, cross)


def nearest_curve_signs(outline: GlyphOutline, points: np.ndarray) -> np.ndarray:
    """Per-point sign from the nearest curve's cross product (the per-curve rule).

    When several curves are equally near (a shared corner vertex), the one
    whose tangent is most orthogonal to ``q - foot`` decides.
    """
    curves = outline.curves_array()
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    t, d2 = nearest_params(curves, points)
    u = 1 - t
    c0, c1, c2 = curves[None, :, 0], curves[None, :, 1], curves[None, :, 2]
    foot = (u * u)[..., None] * c0 + (2 * t * u)[..., None] * c1 + (t * t)[..., None] * c2
    v = 2 * u[..., None] * (c1 - c0) + 2 * t[..., None] * (c2 - c1)
    fallback = np.hypot(v[..., 0], v[..., 1]) <= 1e-14
    v = np.where(fallback[..., None], np.broadcast_to(c2 - c0, v.shape), v)
    w = points[:, None, :] - foot
    cross = w[..., 0] * v[..., 1] - w[..., 1] * v[..., 0]
    dmin = d2.min(axis=1, keepdims=True)
    tied = d2 <= dmin * (1 + 1e-9) + 1e-30
    ortho = np.abs(cross) / (np.hypot(w[..., 0], w[..., 1]) * np.hypot(v[..., 0], v[..., 1]) + 1e-300)
    idx = np.argmax(np.where(tied, ortho, -1.0), axis=1)
    return np.sign(cross[np.arange(len(points)), idx])


def unsigned_distance(curves: np.ndarray, points: np.ndarray, chunk: int = 2048) -> np.ndarray:
    curves = np.asarray(curves, dtype=float).reshape(-1, 3, 2)
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    out = np.empty(len(points))
    for s in range(0, len(points), chunk):
        _, d2 = nearest_params(curves, points[s:s + chunk])
        out[s:s + chunk] = np.sqrt(np.min(d2, axis=1))
    return out


def signed_distances(outline: GlyphOutline, points: np.ndarray) -> np.ndarray:
    """Vectorized glyph signed distance for ``(N, 2)`` points."""
    curves = outline.curves_array()
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    dist = unsigned_distance(curves, points)
    inside = winding_numbers(curves, points) != 0
    return np.where(inside, -dist, dist)


def glyph_signed_distance(outline: GlyphOutline, q) -> float:
    return float(signed_distances(outline, np.array([q], dtype=float))[0])


def compute_grid_sdf(outline: GlyphOutline, width: int = 128, height: int = 128) -> SdfGrid:
    if width < 8 or height < 8:
        raise ValueError("grid must be at least 8x8")
    X, Y = pixel_centers(width, height)
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    return SdfGrid(width, height, signed_distances(outline, pts).reshape(height, width))


# --------------------------------------------------------------------------
# contour sampling

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


def _speed(c: np.ndarray, t):
    t = np.asarray(t)[..., None]
    v = 2 * (1 - t) * (c[1] - c[0]) + 2 * t * (c[2] - c[1])
    return np.hypot(v[..., 0], v[..., 1])


def _gl(c, a, b):
    mid, half = (a + b) / 2, (b - a) / 2
    return half * np.sum(_GL_WEIGHTS * _speed(c, mid + half * _GL_NODES))


def arc_length(c: np.ndarray, a: float = 0.0, b: float = 1.0, tol: float = 1e-6, depth: int = 0) -> float:
    """Adaptive Gauss-Legendre arc length of a quadratic over ``[a, b]``."""
    whole = _gl(c, a, b)
    m = (a + b) / 2
    halves = _gl(c, a, m) + _gl(c, m, b)
    if abs(whole - halves) <= tol or depth >= 30:
        return halves
    return arc_length(c, a, m, tol / 2, depth + 1) + arc_length(c, m, b, tol / 2, depth + 1)


def _param_at_length(c: np.ndarray, target: float, total: float) -> float:
    """Invert arc length on one curve: Newton with bisection safeguard."""
    if total <= 0:
        return 0.0
    lo, hi = 0.0, 1.0
    t = target / total
    for _ in range(50):
        f = arc_length(c, 0.0, t) - target
        if abs(f) < 1e-9:
            break
        if f > 0:
            hi = t
        else:
            lo = t
        sp = float(_speed(c, t))
        nt = t - f / sp if sp > 1e-12 else -1.0
        t = nt if lo < nt < hi else (lo + hi) / 2
    return t


def sample_contour_sdf(
    outline: GlyphOutline,
    m: int = DEFAULT_CONTOUR_SAMPLES,
    band: float = DEFAULT_BAND,
    seed: int = 0,
) -> ContourSamples:
    """Scatter ``m`` points near the outline and record their exact distances.

    Positions are uniform in arc length over all contours; each is pushed
    along the local normal by an offset drawn uniformly from ``[-band, band]``.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if not band > 0:
        raise ValueError("band must be positive")
    rng = np.random.default_rng(seed)
    curves = outline.curves_array()
    lengths = np.array([arc_length(c) for c in curves])
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    total = cum[-1]
    s = rng.uniform(0.0, total, size=m)
    offsets = rng.uniform(-band, band, size=m)
    idx = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(curves) - 1)
    pts = np.empty((m, 2))
    for i in range(m):
        c = curves[idx[i]]
        t = _param_at_length(c, s[i] - cum[idx[i]], lengths[idx[i]])
        u = 1 - t
        p = u * u * c[0] + 2 * t * u * c[1] + t * t * c[2]
        try:
            v = _tangent(c, t)
        except ZeroTangent:
            v = np.array([1.0, 0.0])
        n = np.array([v[1], -v[0]]) / np.hypot(*v)
        pts[i] = p + offsets[i] * n
    return ContourSamples(pts, signed_distances(outline, pts))


# --------------------------------------------------------------------------
# file formats


def write_sdf(grid: SdfGrid) -> bytes:
    header = f"SDF1 {grid.width} {grid.height}\n".encode("ascii")
    return header + np.asarray(grid.samples, dtype="<f4").tobytes()


def read_sdf(data: bytes) -> SdfGrid:
    nl = data.find(b"\n")
    parts = data[:nl].split() if nl > 0 else []
    if len(parts) != 3 or parts[0] != b"SDF1":
        raise FormatError("not an SDF1 file")
    try:
        w, h = int(parts[1]), int(parts[2])
    except ValueError:
        raise FormatError("bad SDF1 dimensions") from None
    body = data[nl + 1:]
    if len(body) != 4 * w * h:
        raise FormatError(f"SDF1 payload has {len(body)} bytes, expected {4 * w * h}")
    return SdfGrid(w, h, np.frombuffer(body, dtype="<f4").astype(float).reshape(h, w))


def write_sdc(samples: ContourSamples) -> bytes:
    header = f"SDC1 {len(samples)}\n".encode("ascii")
    body = np.column_stack([samples.xy, samples.d]).astype("<f4")
    return header + body.tobytes()


def read_sdc(data: bytes) -> ContourSamples:
    nl = data.find(b"\n")
    parts = data[:nl].split() if nl > 0 else []
    if len(parts) != 2 or parts[0] != b"SDC1":
        raise FormatError("not an SDC1 file")
    try:
        m = int(parts[1])
    except ValueError:
        raise FormatError("bad SDC1 sample count") from None
    body = data[nl + 1:]
    if len(body) != 12 * m:
        raise FormatError(f"SDC1 payload has {len(body)} bytes, expected {12 * m}")
    arr = np.frombuffer(body, dtype="<f4").astype(float).reshape(m, 3)
    return ContourSamples(arr[:, :2].copy(), arr[:, 2].copy())
