"""Implicit glyph field built from parabolic curves, and its rasterizer.

A curve is ``H(x, y) = k (p x + q y)^2 + d x + e y + f``; its inside is
``H < 0``. A primitive is the intersection (max) of ``n_a`` curves and the
field is the union (min) of ``n_p`` primitives. Parameters live in an
array of shape ``(n_p, n_a, 6)`` ordered ``k, p, q, d, e, f``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from glyphfield.errors import FormatError, ShapeMismatch
from glyphfield.glyph_ir import pixel_centers

DEFAULT_GAMMA = 0.02
DEFAULT_NP = 16
DEFAULT_NA = 6


@dataclass(frozen=True)
class ParabolicCurve:
    k: float
    p: float
    q: float
    d: float
    e: float
    f: float

    def as_array(self) -> np.ndarray:
        return np.array([self.k, self.p, self.q, self.d, self.e, self.f], dtype=float)

    @classmethod
    def from_array(cls, a) -> ParabolicCurve:
        return cls(*(float(v) for v in a))


@dataclass(frozen=True, eq=False)
class Field:
    params: np.ndarray  # (n_p, n_a, 6)

    def __post_init__(self):
        p = np.array(self.params, dtype=float)
        if p.ndim != 3 or p.shape[2] != 6 or p.shape[0] < 1 or p.shape[1] < 1:
            raise ShapeMismatch(f"field parameters must be (n_p, n_a, 6), got {p.shape}")
        p.setflags(write=False)
        object.__setattr__(self, "params", p)

    @property
    def n_p(self) -> int:
        return self.params.shape[0]

    @property
    def n_a(self) -> int:
        return self.params.shape[1]

    def curve(self, i: int, j: int) -> ParabolicCurve:
        return ParabolicCurve.from_array(self.params[i, j])

    def primitive(self, i: int) -> list[ParabolicCurve]:
        return [self.curve(i, j) for j in range(self.n_a)]

    @classmethod
    def from_curves(cls, primitives) -> Field:
        return cls(np.array([[c.as_array() for c in prim] for prim in primitives], dtype=float))

    def normalized(self) -> Field:
        """Rescale so ``p^2 + q^2 = 1`` with ``k`` absorbing the norm.

        ``H`` is unchanged pointwise. Curves with ``p = q = 0`` are left alone.
        """
        out = self.params.copy()
        n2 = out[..., 1] ** 2 + out[..., 2] ** 2
        ok = n2 > 0
        n = np.sqrt(np.where(ok, n2, 1.0))
        out[..., 0] = np.where(ok, out[..., 0] * n2, out[..., 0])
        out[..., 1] = np.where(ok, out[..., 1] / n, out[..., 1])
        out[..., 2] = np.where(ok, out[..., 2] / n, out[..., 2])
        return Field(out)

    def to_bytes(self) -> bytes:
        header = f"PFD1 {self.n_p} {self.n_a}\n".encode("ascii")
        return header + self.params.astype("<f4").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> Field:
        nl = data.find(b"\n")
        parts = data[:nl].split() if nl > 0 else []
        if len(parts) != 3 or parts[0] != b"PFD1":
            raise FormatError("not a PFD1 file")
        try:
            n_p, n_a = int(parts[1]), int(parts[2])
        except ValueError:
            raise FormatError("bad PFD1 header") from None
        body = data[nl + 1:]
        if n_p < 1 or n_a < 1 or len(body) != 24 * n_p * n_a:
            raise FormatError(f"PFD1 payload has {len(body)} bytes for {n_p}x{n_a} curves")
        arr = np.frombuffer(body, dtype="<f4").astype(float).reshape(n_p, n_a, 6)
        if not np.all(np.isfinite(arr)):
            raise FormatError("PFD1 contains non-finite parameters")
        return cls(arr)


def interpolate(a: Field, b: Field, lam: float) -> Field:
    """Elementwise ``(1 - lam) a + lam b`` of two same-shaped fields."""
    if a.params.shape != b.params.shape:
        raise ShapeMismatch(f"cannot blend {a.params.shape} with {b.params.shape}")
    if lam == 0.0:
        return Field(a.params)
    if lam == 1.0:
        return Field(b.params)
    return Field((1.0 - lam) * a.params + lam * b.params)


@dataclass(frozen=True)
class RenderConfig:
    gamma: float = DEFAULT_GAMMA
    width: int = 128
    height: int = 128

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.width < 1 or self.height < 1:
            raise ValueError("image size must be positive")


# --------------------------------------------------------------------------
# evaluation


def eval_curve(c: ParabolicCurve, x, y):
    s = c.p * x + c.q * y
    return c.k * s * s + c.d * x + c.e * y + c.f


def curve_values(params: np.ndarray, x, y) -> np.ndarray:
    """``H`` for a parameter array ``(..., 6)`` broadcast against points."""
    params = np.asarray(params, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    k, p, q, d, e, f = (params[..., i][..., None] for i in range(6))
    s = p * x.ravel() + q * y.ravel()
    return k * s * s + d * x.ravel() + e * y.ravel() + f


def eval_primitive(curves, x, y):
    """Max over the curves, with the (lowest) argmax index."""
    vals = [eval_curve(c, x, y) for c in curves]
    if not vals:
        raise ValueError("primitive needs at least one curve")
    best, idx = vals[0], 0
    for j, v in enumerate(vals[1:], start=1):
        if v > best:
            best, idx = v, j
    return best, idx


def eval_field(field: Field, x, y):
    """Min over primitives: ``(value, primitive index, curve index)``."""
    best = None
    for i in range(field.n_p):
        v, j = eval_primitive(field.primitive(i), x, y)
        if best is None or v < best[0]:
            best = (v, i, j)
    return best


@numba.njit(cache=True)
def _forward(params, xs, ys):
    n_p, n_a = params.shape[0], params.shape[1]
    m = xs.shape[0]
    g = np.empty(m)
    sel = np.empty(m, dtype=np.int64)
    for t in range(m):
        x = xs[t]
        y = ys[t]
        gmin = np.inf
        gidx = 0
        for i in range(n_p):
            fmax = -np.inf
            fidx = 0
            for j in range(n_a):
                s = params[i, j, 1] * x + params[i, j, 2] * y
                h = params[i, j, 0] * s * s + params[i, j, 3] * x + params[i, j, 4] * y + params[i, j, 5]
                if h > fmax:
                    fmax = h
                    fidx = j
            if fmax < gmin:
                gmin = fmax
                gidx = i * n_a + fidx
        g[t] = gmin
        sel[t] = gidx
    return g, sel


@numba.njit(cache=True)
def _scatter(params, xs, ys, sel, dg, out):
    n_a = params.shape[1]
    for t in range(xs.shape[0]):
        w = dg[t]
        if w == 0.0:
            continue
        i = sel[t] // n_a
        j = sel[t] % n_a
        x = xs[t]
        y = ys[t]
        k = params[i, j, 0]
        s = params[i, j, 1] * x + params[i, j, 2] * y
        out[i, j, 0] += w * s * s
        out[i, j, 1] += w * 2.0 * k * s * x
        out[i, j, 2] += w * 2.0 * k * s * y
        out[i, j, 3] += w * x
        out[i, j, 4] += w * y
        out[i, j, 5] += w


def field_values(params: np.ndarray, xs: np.ndarray, ys: np.ndarray):
    """Field value at each point and the flat index ``i * n_a + j`` of the
    curve that produced it (lowest index on ties)."""
    params = np.ascontiguousarray(params, dtype=float)
    xs = np.ascontiguousarray(np.ravel(xs), dtype=float)
    ys = np.ascontiguousarray(np.ravel(ys), dtype=float)
    return _forward(params, xs, ys)


def scatter_gradient(params, xs, ys, sel, dg, out=None) -> np.ndarray:
    """Accumulate ``sum_t dg[t] * dH_sel[t]/dtheta`` into an ``(n_p, n_a, 6)`` array."""
    params = np.ascontiguousarray(params, dtype=float)
    if out is None:
        out = np.zeros_like(params)
    _scatter(
        params,
        np.ascontiguousarray(np.ravel(xs), dtype=float),
        np.ascontiguousarray(np.ravel(ys), dtype=float),
        np.ascontiguousarray(sel),
        np.ascontiguousarray(np.ravel(dg), dtype=float),
        out,
    )
    return out


def shade(g, gamma: float = DEFAULT_GAMMA):
    """Map field values to intensities: 0 (ink) below ``-gamma``, 1 above ``gamma``,
    a cubic smoothstep in between."""
    g = np.asarray(g, dtype=float)
    r = g / gamma
    mid = 0.5 - 0.25 * (r**3 - 3.0 * r)
    return np.where(g > gamma, 1.0, np.where(g < -gamma, 0.0, mid))


def shade_derivative(g, gamma: float = DEFAULT_GAMMA):
    g = np.asarray(g, dtype=float)
    r = g / gamma
    return np.where(np.abs(g) <= gamma, -(3.0 / (4.0 * gamma)) * (r * r - 1.0), 0.0)


def render(field: Field, cfg: RenderConfig = RenderConfig()) -> np.ndarray:
    """Rasterize at pixel centers; returns ``(height, width)`` in [0, 1]."""
    X, Y = pixel_centers(cfg.width, cfg.height)
    g, _ = field_values(field.params, X, Y)
    return shade(g, cfg.gamma).reshape(cfg.height, cfg.width)


def field_mask(field: Field, width: int, height: int | None = None) -> np.ndarray:
    """Boolean ``G < 0`` at pixel centers."""
    height = width if height is None else height
    X, Y = pixel_centers(width, height)
    g, _ = field_values(field.params, X, Y)
    return (g < 0).reshape(height, width)


def render_gradient(field: Field, cfg: RenderConfig, upstream: np.ndarray) -> np.ndarray:
    """Pull an image-shaped adjoint back to the ``(n_p, n_a, 6)`` parameters.

    Each pixel only feeds the curve selected by the min/max composition.
    """
    upstream = np.asarray(upstream, dtype=float)
    if upstream.shape != (cfg.height, cfg.width):
        raise ShapeMismatch(f"upstream {upstream.shape} vs image {(cfg.height, cfg.width)}")
    X, Y = pixel_centers(cfg.width, cfg.height)
    g, sel = field_values(field.params, X, Y)
    dg = upstream.ravel() * shade_derivative(g, cfg.gamma)
    return scatter_gradient(field.params, X, Y, sel, dg)


# --------------------------------------------------------------------------
# PGM


def quantize(image: np.ndarray) -> np.ndarray:
    """8-bit levels of an image in [0, 1], rounding half up."""
    img = np.asarray(image, dtype=float)
    return np.floor(np.clip(img, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def write_pgm(image: np.ndarray) -> bytes:
    """Binary P5 greymap, maxval 255, rounding half up."""
    vals = quantize(image)
    h, w = vals.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + vals.tobytes()


def read_pgm(data: bytes) -> np.ndarray:
    """Read a P5 greymap (maxval <= 255) into floats in [0, 1]."""
    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.find(b"\n", pos) + 1
            if pos == 0:
                raise FormatError("truncated PGM header")
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError("truncated PGM header")
        fields.append(data[start:pos])
    if fields[0] != b"P5":
        raise FormatError("not a binary PGM (P5)")
    try:
        w, h, maxval = (int(v) for v in fields[1:])
    except ValueError:
        raise FormatError("bad PGM header") from None
    pos += 1
    body = data[pos:pos + w * h]
    if not 0 < maxval <= 255 or w < 1 or h < 1 or len(body) != w * h:
        raise FormatError("unsupported or truncated PGM")
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w).astype(float) / maxval
