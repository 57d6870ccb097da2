"""Quadratic-Bézier glyph outlines: SVG in, SVG out, orientation, winding.

Internally everything lives in a y-up frame normalized to [-1, 1]^2. The
flip from SVG's y-down convention happens only in :func:`parse_svg` and
:func:`write_svg`.
"""

from __future__ import annotations

import math
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from glyphfield.errors import DegenerateBox, EmptyPath, OpenContour, UnsupportedCommand

Point = tuple[float, float]

CLOSE_TOL = 1e-9
CUBIC_TOL = 1e-3


@dataclass(frozen=True)
class QuadBezier:
    p0: Point
    p1: Point
    p2: Point

    def point(self, t: float) -> Point:
        u = 1.0 - t
        return (
            u * u * self.p0[0] + 2 * t * u * self.p1[0] + t * t * self.p2[0],
            u * u * self.p0[1] + 2 * t * u * self.p1[1] + t * t * self.p2[1],
        )

    def derivative(self, t: float) -> Point:
        return (
            2 * (1 - t) * (self.p1[0] - self.p0[0]) + 2 * t * (self.p2[0] - self.p1[0]),
            2 * (1 - t) * (self.p1[1] - self.p0[1]) + 2 * t * (self.p2[1] - self.p1[1]),
        )

    def reversed(self) -> QuadBezier:
        return QuadBezier(self.p2, self.p1, self.p0)

    def as_array(self) -> np.ndarray:
        return np.array([self.p0, self.p1, self.p2], dtype=float)

    def is_degenerate(self) -> bool:
        pts = self.as_array()
        return max(
            np.hypot(*(pts[i] - pts[j])) for i, j in ((0, 1), (1, 2), (0, 2))
        ) < CLOSE_TOL

    @classmethod
    def line(cls, a: Point, b: Point) -> QuadBezier:
        return cls(a, ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2), b)


def _cross(a, b) -> float:
    return a[0] * b[1] - a[1] * b[0]


@dataclass(frozen=True)
class Contour:
    curves: tuple[QuadBezier, ...]

    def __post_init__(self):
        object.__setattr__(self, "curves", tuple(self.curves))

    def is_closed(self, tol: float = CLOSE_TOL) -> bool:
        n = len(self.curves)
        if n == 0:
            return False
        for i, c in enumerate(self.curves):
            nxt = self.curves[(i + 1) % n]
            if math.dist(c.p2, nxt.p0) > tol:
                return False
        return True

    def signed_area(self) -> float:
        """Exact enclosed area by Green's theorem; positive when counterclockwise."""
        total = 0.0
        for c in self.curves:
            total += (_cross(c.p0, c.p1) + _cross(c.p1, c.p2)) / 3.0 + _cross(c.p0, c.p2) / 6.0
        return total

    def reversed(self) -> Contour:
        return Contour(tuple(c.reversed() for c in reversed(self.curves)))

    def as_array(self) -> np.ndarray:
        return np.array([c.as_array() for c in self.curves], dtype=float).reshape(-1, 3, 2)


@dataclass(frozen=True)
class GlyphOutline:
    contours: tuple[Contour, ...]
    source_bbox: tuple[float, float, float, float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "contours", tuple(self.contours))

    def curves_array(self) -> np.ndarray:
        """All curves stacked as a ``(K, 3, 2)`` array of control points."""
        if not self.contours:
            return np.zeros((0, 3, 2))
        return np.concatenate([c.as_array() for c in self.contours], axis=0)

    def check(self, margin: float = 1.05) -> None:
        """Raise ``ValueError`` if the normalized-outline invariants fail."""
        if not self.contours:
            raise ValueError("outline has no contours")
        for i, contour in enumerate(self.contours):
            if not contour.is_closed():
                raise ValueError(f"contour {i} is not closed")
            for c in contour.curves:
                if c.is_degenerate():
                    raise ValueError(f"contour {i} has a curve collapsed to a point")
        pts = self.curves_array()
        if not np.all(np.isfinite(pts)):
            raise ValueError("non-finite coordinates")
        if np.abs(pts).max() > margin:
            raise ValueError(f"outline leaves [-{margin}, {margin}]^2")


# --------------------------------------------------------------------------
# affine helpers


def _map_curves(curves: Iterable[QuadBezier], fn) -> list[QuadBezier]:
    return [QuadBezier(fn(c.p0), fn(c.p1), fn(c.p2)) for c in curves]


def transform_outline(outline: GlyphOutline, fn, source_bbox=None) -> GlyphOutline:
    return GlyphOutline(
        tuple(Contour(tuple(_map_curves(c.curves, fn))) for c in outline.contours),
        source_bbox if source_bbox is not None else outline.source_bbox,
    )


def normalize(outline: GlyphOutline, em_box: Sequence[float]) -> GlyphOutline:
    """Map ``em_box = (xmin, ymin, xmax, ymax)`` onto [-1, 1]^2.

    Uses one uniform scale, so a non-square box ends up centered on its
    shorter axis.
    """
    xmin, ymin, xmax, ymax = map(float, em_box)
    w, h = xmax - xmin, ymax - ymin
    if not (w > 0 and h > 0) or not all(map(math.isfinite, (w, h))):
        raise DegenerateBox(f"em box {tuple(em_box)} has no area")
    s = 2.0 / max(w, h)
    cx, cy = (xmin + xmax) / 2, (ymin + ymax) / 2
    return transform_outline(
        outline,
        lambda p: ((p[0] - cx) * s, (p[1] - cy) * s),
        source_bbox=(xmin, ymin, xmax, ymax),
    )


# --------------------------------------------------------------------------
# winding and rasterization


def pixel_centers(width: int, height: int) -> tuple[np.ndarray, np.ndarray]:
    """Row-major pixel centers mapped into [-1, 1]^2; row 0 is the top."""
    xs = -1.0 + (np.arange(width) + 0.5) * (2.0 / width)
    ys = 1.0 - (np.arange(height) + 0.5) * (2.0 / height)
    X, Y = np.meshgrid(xs, ys)
    return X, Y


def _monotone_pieces(curves: np.ndarray) -> np.ndarray:
    """Split ``(K, 3, 2)`` quadratics at interior y-extrema."""
    out = []
    for c in curves:
        y0, y1, y2 = c[:, 1]
        den = y0 - 2 * y1 + y2
        t = (y0 - y1) / den if den != 0 else -1.0
        if 0.0 < t < 1.0:
            a = c[0] + (c[1] - c[0]) * t
            b = c[1] + (c[2] - c[1]) * t
            m = a + (b - a) * t
            out.append(np.array([c[0], a, m]))
            out.append(np.array([m, b, c[2]]))
        else:
            out.append(c)
    if not out:
        return np.zeros((0, 3, 2))
    return np.array(out)


def _crossings(pieces: np.ndarray, qy: np.ndarray):
    """For y-monotone pieces ``(K,3,2)`` and query heights ``(N,)`` return
    ``(x, dir)`` of shape ``(N, K)``; dir is 0 where the piece is not hit
    under the half-open rule ``min <= y < max``."""
    y0 = pieces[:, 0, 1]
    y1 = pieces[:, 1, 1]
    y2 = pieces[:, 2, 1]
    qy = qy[:, None]
    up = (y0 <= qy) & (qy < y2)
    down = (y2 <= qy) & (qy < y0)
    direction = up.astype(np.int8) - down.astype(np.int8)

    a = y0 - 2 * y1 + y2
    b = 2 * (y1 - y0)
    c = y0 - qy
    lin = np.abs(a) < 1e-12 * (np.abs(b) + 1e-300)
    disc = np.maximum(b * b - 4 * a * c, 0.0)
    sq = np.sqrt(disc)
    qv = -0.5 * (b + np.where(b >= 0, sq, -sq))
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = qv / a
        r2 = c / qv
        tl = -c / b
    d1 = np.abs(np.clip(r1, 0, 1) - r1)
    d2 = np.abs(np.clip(r2, 0, 1) - r2)
    d1 = np.where(np.isfinite(r1), d1, np.inf)
    d2 = np.where(np.isfinite(r2), d2, np.inf)
    t = np.where(d1 <= d2, r1, r2)
    t = np.where(lin, tl, t)
    t = np.clip(np.nan_to_num(t, nan=0.0), 0.0, 1.0)
    u = 1 - t
    x = u * u * pieces[:, 0, 0] + 2 * t * u * pieces[:, 1, 0] + t * t * pieces[:, 2, 0]
    return x, direction


def winding_numbers(curves: np.ndarray, points: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Nonzero-rule winding number of each point w.r.t. closed quadratic contours.

    ``curves`` is ``(K, 3, 2)``; ``points`` is ``(N, 2)``. Counterclockwise
    loops contribute +1.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    pieces = _monotone_pieces(np.asarray(curves, dtype=float).reshape(-1, 3, 2))
    out = np.zeros(len(points), dtype=np.int64)
    if len(pieces) == 0:
        return out
    for s in range(0, len(points), chunk):
        q = points[s:s + chunk]
        x, d = _crossings(pieces, q[:, 1])
        out[s:s + chunk] = np.sum(np.where(x > q[:, :1], d, 0), axis=1)
    return out


def rasterize(curves: np.ndarray, width: int, height: int | None = None) -> np.ndarray:
    """Scanline fill (nonzero rule) sampled at pixel centers.

    Returns a boolean ink mask of shape ``(height, width)``. Each scanline
    intersects the y-monotone pieces exactly, sorts the crossings, and
    accumulates winding from the right.
    """
    height = width if height is None else height
    pieces = _monotone_pieces(np.asarray(curves, dtype=float).reshape(-1, 3, 2))
    mask = np.zeros((height, width), dtype=bool)
    if len(pieces) == 0:
        return mask
    xs = -1.0 + (np.arange(width) + 0.5) * (2.0 / width)
    ys = 1.0 - (np.arange(height) + 0.5) * (2.0 / height)
    cx, cd = _crossings(pieces, ys)
    for row in range(height):
        hit = cd[row] != 0
        if not hit.any():
            continue
        order = np.argsort(cx[row][hit], kind="stable")
        x_sorted = cx[row][hit][order]
        d_sorted = cd[row][hit][order].astype(np.int64)
        # winding at px = sum of dirs with crossing x > px
        suffix = np.concatenate([np.cumsum(d_sorted[::-1])[::-1], [0]])
        idx = np.searchsorted(x_sorted, xs, side="right")
        mask[row] = suffix[idx] != 0
    return mask


def _contains(contour: Contour, pt) -> bool:
    return winding_numbers(contour.as_array(), np.array([pt]))[0] != 0


def nesting_depths(contours: Sequence[Contour]) -> list[int]:
    depths = []
    for i, c in enumerate(contours):
        probe = c.curves[0].point(0.5)
        depths.append(sum(1 for j, o in enumerate(contours) if j != i and _contains(o, probe)))
    return depths


def orient_contours(contours: Sequence[Contour]) -> list[Contour]:
    """Counterclockwise for even nesting depth, clockwise for odd."""
    out = []
    for c, depth in zip(contours, nesting_depths(contours)):
        area = c.signed_area()
        want_positive = depth % 2 == 0
        out.append(c if (area > 0) == want_positive else c.reversed())
    return out


# --------------------------------------------------------------------------
# cubic -> quadratic


def _line_intersection(a, da, b, db):
    den = _cross(da, db)
    if abs(den) < 1e-12 * (math.hypot(*da) * math.hypot(*db) + 1e-300):
        return None
    t = _cross((b[0] - a[0], b[1] - a[1]), db) / den
    return (a[0] + da[0] * t, a[1] + da[1] * t)


def _split_cubic(c, t=0.5):
    p0, p1, p2, p3 = (np.asarray(p, dtype=float) for p in c)
    a = p0 + (p1 - p0) * t
    b = p1 + (p2 - p1) * t
    cc = p2 + (p3 - p2) * t
    d = a + (b - a) * t
    e = b + (cc - b) * t
    m = d + (e - d) * t
    return (p0, a, d, m), (m, e, cc, p3)


def _single_quad(c):
    p0, p1, p2, p3 = (np.asarray(p, dtype=float) for p in c)
    d0 = p1 - p0 if np.hypot(*(p1 - p0)) > 1e-12 else p2 - p0
    d3 = p3 - p2 if np.hypot(*(p3 - p2)) > 1e-12 else p3 - p1
    if np.hypot(*(p3 - p0)) < 1e-15:
        return None
    chord = p3 - p0
    span = np.hypot(*chord)
    collinear = all(abs(_cross(chord, q - p0)) <= 1e-12 * span * span for q in (p1, p2))
    if collinear:
        return (p0, (p0 + p3) / 2, p3)
    x = _line_intersection(p0, d0, p3, d3)
    if x is None:
        return None
    return (p0, np.asarray(x), p3)


def _deviation(cubic, quad, n=33) -> float:
    t = np.linspace(0.0, 1.0, n)[:, None]
    u = 1 - t
    c = [np.asarray(p) for p in cubic]
    q = [np.asarray(p) for p in quad]
    pc = u**3 * c[0] + 3 * u * u * t * c[1] + 3 * u * t * t * c[2] + t**3 * c[3]
    pq = u * u * q[0] + 2 * u * t * q[1] + t * t * q[2]
    return float(np.max(np.hypot(*(pc - pq).T)))


def cubic_to_quadratics(p0, p1, p2, p3, tol: float = CUBIC_TOL, max_depth: int = 16) -> list[QuadBezier]:
    """Approximate a cubic by a chain of quadratics via midpoint subdivision.

    Each piece gets a single quadratic whose off-curve point is the
    intersection of the piece's end tangents; pieces split in half until the
    parameter-wise deviation (an upper bound on the geometric one) is below
    ``tol``.
    """
    out: list[QuadBezier] = []

    def rec(c, depth):
        q = _single_quad(c)
        if q is not None and (depth >= max_depth or _deviation(c, q) < tol):
            out.append(QuadBezier(*(tuple(map(float, p)) for p in q)))
            return
        if depth >= max_depth:
            out.append(QuadBezier.line(tuple(map(float, c[0])), tuple(map(float, c[3]))))
            return
        left, right = _split_cubic(c)
        rec(left, depth + 1)
        rec(right, depth + 1)

    rec((p0, p1, p2, p3), 0)
    return out


# --------------------------------------------------------------------------
# SVG in


_TOKEN = re.compile(r"[A-Za-z]|[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?")
_ARGS = {"M": 2, "L": 2, "H": 1, "V": 1, "Q": 4, "T": 2, "C": 6, "S": 4, "Z": 0}


def _parse_transform(text: str | None) -> np.ndarray:
    m = np.eye(3)
    if not text:
        return m
    for name, args in re.findall(r"([A-Za-z]+)\s*\(([^)]*)\)", text):
        v = [float(a) for a in re.split(r"[\s,]+", args.strip()) if a]
        if name == "matrix" and len(v) == 6:
            t = np.array([[v[0], v[2], v[4]], [v[1], v[3], v[5]], [0, 0, 1]])
        elif name == "translate":
            t = np.array([[1, 0, v[0]], [0, 1, v[1] if len(v) > 1 else 0.0], [0, 0, 1]])
        elif name == "scale":
            sy = v[1] if len(v) > 1 else v[0]
            t = np.diag([v[0], sy, 1.0])
        elif name == "rotate":
            a = math.radians(v[0])
            r = np.array([[math.cos(a), -math.sin(a), 0], [math.sin(a), math.cos(a), 0], [0, 0, 1]])
            if len(v) == 3:
                sh = np.array([[1, 0, v[1]], [0, 1, v[2]], [0, 0, 1]])
                r = sh @ r @ np.linalg.inv(sh)
            t = r
        else:
            raise UnsupportedCommand(f"unsupported transform {name!r}")
        m = m @ t
    return m


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _path_elements(root: ET.Element):
    def walk(el, m):
        m = m @ _parse_transform(el.get("transform"))
        if _local(el.tag) == "path":
            yield el, m
        for child in el:
            yield from walk(child, m)

    yield from walk(root, np.eye(3))


def parse_path_data(d: str) -> list[list[tuple]]:
    """Tokenize path data into subpaths of absolute segments.

    Each subpath is a list of ``("L", a, b)``, ``("Q", a, c, b)`` or
    ``("C", a, c1, c2, b)`` tuples in source coordinates. Raises
    ``OpenContour`` for subpaths that are not closed.
    """
    tokens = _TOKEN.findall(d)
    subpaths: list[list[tuple]] = []
    current: list[tuple] = []
    cur = start = (0.0, 0.0)
    closed = True
    last_ctrl = None  # reflected control point for T/S
    last_cmd = ""
    i = 0
    cmd = None

    def finish():
        nonlocal current
        if current:
            subpaths.append(current)
        current = []

    while i < len(tokens):
        tok = tokens[i]
        if tok.isalpha():
            cmd = tok
            i += 1
            if cmd.upper() not in _ARGS:
                raise UnsupportedCommand(f"path command {cmd!r} is not supported")
        elif cmd is None:
            raise UnsupportedCommand("path data must start with a command")
        up = cmd.upper()
        rel = cmd.islower()
        n = _ARGS[up]
        if up == "Z":
            if math.dist(cur, start) > CLOSE_TOL:
                current.append(("L", cur, start))
            cur = start
            closed = True
            finish()
            last_ctrl, last_cmd = None, "Z"
            cmd = None
            continue
        args = tokens[i:i + n]
        if len(args) < n or any(a.isalpha() for a in args):
            raise UnsupportedCommand(f"truncated arguments for {cmd!r}")
        v = [float(a) for a in args]
        i += n
        ox, oy = cur if rel else (0.0, 0.0)

        def pt(k):
            return (v[k] + ox, v[k + 1] + oy)

        if up == "M":
            if not closed and current:
                if math.dist(cur, start) > CLOSE_TOL:
                    raise OpenContour("subpath is not closed before next moveto")
                finish()
            elif current:
                finish()
            cur = start = pt(0)
            closed = False
            cmd = "l" if rel else "L"
            last_ctrl, last_cmd = None, "M"
            continue
        closed = False
        if up == "L":
            nxt = pt(0)
            current.append(("L", cur, nxt))
            last_ctrl = None
        elif up == "H":
            nxt = (v[0] + ox, cur[1])
            current.append(("L", cur, nxt))
            last_ctrl = None
        elif up == "V":
            nxt = (cur[0], v[0] + oy)
            current.append(("L", cur, nxt))
            last_ctrl = None
        elif up == "Q":
            c1, nxt = pt(0), pt(2)
            current.append(("Q", cur, c1, nxt))
            last_ctrl = c1
        elif up == "T":
            if last_cmd in ("Q", "T") and last_ctrl is not None:
                c1 = (2 * cur[0] - last_ctrl[0], 2 * cur[1] - last_ctrl[1])
            else:
                c1 = cur
            nxt = pt(0)
            current.append(("Q", cur, c1, nxt))
            last_ctrl = c1
        elif up == "C":
            c1, c2, nxt = pt(0), pt(2), pt(4)
            current.append(("C", cur, c1, c2, nxt))
            last_ctrl = c2
        elif up == "S":
            if last_cmd in ("C", "S") and last_ctrl is not None:
                c1 = (2 * cur[0] - last_ctrl[0], 2 * cur[1] - last_ctrl[1])
            else:
                c1 = cur
            c2, nxt = pt(0), pt(2)
            current.append(("C", cur, c1, c2, nxt))
            last_ctrl = c2
        last_cmd = up
        cur = nxt
    if current:
        if math.dist(cur, start) > CLOSE_TOL:
            raise OpenContour("path ends without closing its last subpath")
        finish()
    return subpaths


def _num(text: str | None) -> float | None:
    if text is None:
        return None
    m = re.match(r"\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)", text)
    return float(m.group(1)) if m else None


def parse_svg(data: bytes | str, em_box: Sequence[float] | None = None) -> GlyphOutline:
    """Parse an SVG glyph into a normalized, oriented outline.

    The em box defaults to the root ``viewBox``, then ``width``/``height``,
    then the outline's own bounding box; it is given in SVG user units
    ``(xmin, ymin, xmax, ymax)`` with y pointing down.
    """
    if isinstance(data, str):
        data = data.encode("utf-8")
    root = ET.fromstring(data)
    if em_box is None:
        vb = root.get("viewBox")
        if vb:
            x, y, w, h = (float(v) for v in re.split(r"[\s,]+", vb.strip()))
            em_box = (x, y, x + w, y + h)
        else:
            w, h = _num(root.get("width")), _num(root.get("height"))
            if w and h:
                em_box = (0.0, 0.0, w, h)

    raw_contours: list[list[tuple]] = []
    for k, (el, m) in enumerate(_path_elements(root)):
        d = el.get("d", "")
        try:
            subpaths = parse_path_data(d)
        except (UnsupportedCommand, OpenContour) as exc:
            raise type(exc)(f"path #{k}: {exc}") from None

        def tf(p, m=m):
            x = m[0, 0] * p[0] + m[0, 1] * p[1] + m[0, 2]
            y = m[1, 0] * p[0] + m[1, 1] * p[1] + m[1, 2]
            return (x, -y)

        for sp in subpaths:
            raw_contours.append([(seg[0],) + tuple(tf(p) for p in seg[1:]) for seg in sp])

    if not raw_contours:
        raise EmptyPath("document has no path segments")

    if em_box is None:
        pts = np.array([p for c in raw_contours for seg in c for p in seg[1:]])
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        box_yup = (lo[0], lo[1], hi[0], hi[1])
    else:
        x0, y0, x1, y1 = map(float, em_box)
        box_yup = (x0, -y1, x1, -y0)
    w, h = box_yup[2] - box_yup[0], box_yup[3] - box_yup[1]
    if not (w > 0 and h > 0):
        raise DegenerateBox(f"em box {box_yup} has no area")
    s = 2.0 / max(w, h)
    cx, cy = (box_yup[0] + box_yup[2]) / 2, (box_yup[1] + box_yup[3]) / 2

    def nm(p):
        return ((p[0] - cx) * s, (p[1] - cy) * s)

    contours = []
    for segs in raw_contours:
        curves: list[QuadBezier] = []
        for seg in segs:
            kind, pts = seg[0], [nm(p) for p in seg[1:]]
            if kind == "L":
                curves.append(QuadBezier.line(pts[0], pts[1]))
            elif kind == "Q":
                curves.append(QuadBezier(pts[0], pts[1], pts[2]))
            else:
                curves.extend(cubic_to_quadratics(*pts))
        curves = [c for c in curves if not c.is_degenerate()]
        if not curves:
            continue
        # snap joints exactly so the closure invariant holds bit-for-bit
        fixed = []
        for i, c in enumerate(curves):
            nxt = curves[(i + 1) % len(curves)]
            fixed.append(QuadBezier(c.p0, c.p1, nxt.p0))
        contours.append(Contour(tuple(fixed)))
    if not contours:
        raise EmptyPath("all path segments are degenerate")
    return GlyphOutline(tuple(orient_contours(contours)), source_bbox=box_yup)


# --------------------------------------------------------------------------
# SVG out


def _group_contours(contours: Sequence[Contour]) -> list[list[int]]:
    """Group each even-depth contour with the odd-depth contours directly inside it."""
    depths = nesting_depths(contours)
    groups: dict[int, list[int]] = {}
    order: list[int] = []
    for i, d in enumerate(depths):
        if d % 2 == 0:
            groups[i] = [i]
            order.append(i)
    for i, d in enumerate(depths):
        if d % 2 == 1:
            probe = contours[i].curves[0].point(0.5)
            parents = [j for j in groups if depths[j] == d - 1 and _contains(contours[j], probe)]
            if parents:
                groups[parents[0]].append(i)
            else:
                groups[i] = [i]
                order.append(i)
    return [groups[i] for i in sorted(order)]


def write_svg(contours: Sequence[Contour], canvas_px: int = 128) -> str:
    """Serialize contours as an SVG document on a ``canvas_px`` square canvas.

    One ``<path>`` per outer contour (holes ride along in the same path so
    the nonzero rule leaves them empty), using only M/Q/Z commands.
    """
    half = canvas_px / 2.0

    def fmt(p):
        return f"{(p[0] + 1.0) * half:.6f} {(1.0 - p[1]) * half:.6f}"

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{canvas_px}" height="{canvas_px}" '
        f'viewBox="0 0 {canvas_px} {canvas_px}">',
    ]
    contours = [c for c in contours if c.curves]
    for group in _group_contours(contours) if contours else []:
        parts = []
        for idx in group:
            c = contours[idx]
            parts.append("M " + fmt(c.curves[0].p0))
            parts.extend(f"Q {fmt(q.p1)} {fmt(q.p2)}" for q in c.curves)
            parts.append("Z")
        lines.append(f'<path fill-rule="nonzero" d="{" ".join(parts)}"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
