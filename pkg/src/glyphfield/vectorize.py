"""Turn a fitted field into quadratic-Bézier outlines.

Every boundary piece lives on a *carrier*: a curve with an exact quadratic
polynomial parametrization ``X(s) = c0 + c1 s + c2 s^2``. A parabola's zero
set is such a curve when parametrized by its axis coordinate ``s = p x + q y``,
so any arc of it is exactly one quadratic Bézier. Canvas edges and degenerate
(straight) zero sets are linear carriers.

Clipping a primitive starts from the canvas square and intersects it with
each curve's inside in turn; merging unions the primitive regions. Both use
the same split / classify / stitch steps:

* split every segment where it meets another boundary (roots of
  ``H_other(X(s))``, a polynomial of degree <= 4),
* keep a piece when its midpoint is strictly on the right side, falling back
  to a pair of normal probes when the midpoint sits on another boundary,
* chain kept pieces into closed loops by endpoint matching.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from glyphfield.errors import NonManifoldBoundary, ParallelTangents, StitchFailure
from glyphfield.glyph_ir import Contour, QuadBezier, orient_contours, write_svg
from glyphfield.pseudo_field import Field, ParabolicCurve

EPS_KEEP = 1e-7
MIN_LENGTH = 1e-6
STITCH_TOL = 1e-6
PROBE = 1e-6
SPAN = 1.5  # |s| <= sqrt(2) for every point of the canvas
TOUCH_TOL = 1e-6
GUARD = 10.0

# canvas edges as linear constraints H < 0
SQUARE = np.array(
    [
        [0.0, 0.0, 0.0, 0.0, -1.0, -1.0],  # bottom: -y - 1
        [0.0, 0.0, 0.0, 1.0, 0.0, -1.0],  # right: x - 1
        [0.0, 0.0, 0.0, 0.0, 1.0, -1.0],  # top: y - 1
        [0.0, 0.0, 0.0, -1.0, 0.0, -1.0],  # left: -x - 1
    ]
)
_CORNERS = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])


def _h(params: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Evaluate curves ``(..., 6)`` at points ``(N, 2)`` -> ``(..., N)``."""
    X = np.atleast_2d(X)
    k, p, q, d, e, f = (params[..., i][..., None] for i in range(6))
    s = p * X[:, 0] + q * X[:, 1]
    return k * s * s + d * X[:, 0] + e * X[:, 1] + f


def _grad(params: np.ndarray, X: np.ndarray) -> np.ndarray:
    k, p, q, d, e = params[:5]
    s = p * X[0] + q * X[1]
    return np.array([2 * k * s * p + d, 2 * k * s * q + e])


@dataclass(frozen=True, eq=False)
class Carrier:
    coef: np.ndarray  # (3, 2): X(s) = coef[0] + coef[1] s + coef[2] s^2
    inv: np.ndarray  # (3,): s = inv[0] x + inv[1] y + inv[2] for points on the carrier
    implicit: np.ndarray  # (6,) curve whose zero set contains the carrier
    kind: str  # "arc" | "line"

    def point(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return self.coef[0] + np.multiply.outer(s, self.coef[1]) + np.multiply.outer(s * s, self.coef[2])

    def deriv(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return self.coef[1] + np.multiply.outer(2 * s, self.coef[2])

    def param(self, X) -> float:
        return float(self.inv[0] * X[0] + self.inv[1] * X[1] + self.inv[2])


def _line_carrier(normal, offset, implicit) -> Carrier:
    """Line ``normal . X + offset = 0``, parametrized by arc length along its left direction."""
    n = np.asarray(normal, dtype=float)
    L = np.hypot(*n)
    n = n / L
    offset = offset / L
    t = np.array([-n[1], n[0]])
    base = -offset * n
    coef = np.array([base, t, [0.0, 0.0]])
    inv = np.array([t[0], t[1], -(t @ base)])
    return Carrier(coef, inv, np.asarray(implicit, dtype=float), "line")


def carriers_of(params: np.ndarray) -> tuple[list[Carrier], float | None]:
    """Parametrized components of a curve's zero set.

    Returns ``(carriers, constant)``; ``constant`` is the sign-carrying value
    of ``H`` when the zero set is empty (``H`` never changes sign), else None.
    """
    k, p, q, d, e, f = map(float, params)
    nrm = math.hypot(p, q)
    if nrm < 1e-12 or abs(k) * nrm * nrm < 1e-14:
        # linear: d x + e y + f (+ k s^2 negligible)
        if math.hypot(d, e) < 1e-14:
            return [], f
        return [_line_carrier((d, e), f, params)], None
    tx, ty = p / nrm, q / nrm
    nx, ny = -ty, tx
    K = k * nrm * nrm
    alpha = d * tx + e * ty
    beta = d * nx + e * ny
    scale = max(abs(K), abs(alpha), abs(f), 1.0)
    if abs(beta) > 1e-9 * scale:
        tau, nu = np.array([tx, ty]), np.array([nx, ny])
        coef = np.array([-nu * f / beta, tau - nu * alpha / beta, -nu * K / beta])
        inv = np.array([tx, ty, 0.0])
        return [Carrier(coef, inv, np.asarray(params, dtype=float), "arc")], None
    # zero set is one or two lines s = const
    disc = alpha * alpha - 4 * K * f
    if disc < 0:
        return [], K
    sq = math.sqrt(disc)
    roots = sorted({(-alpha - sq) / (2 * K), (-alpha + sq) / (2 * K)})
    if len(roots) == 2 and roots[1] - roots[0] < 1e-12:
        return [], K
    return [_line_carrier((tx, ty), -r, params) for r in roots], None


@dataclass(eq=False)
class Segment:
    carrier: Carrier
    a: float
    b: float
    start: np.ndarray
    end: np.ndarray
    owner: int = 0
    source: int = -1  # curve index, or -1..-4 for canvas edges

    @classmethod
    def make(cls, carrier, a, b, owner=0, source=-1, start=None, end=None):
        return cls(
            carrier,
            float(a),
            float(b),
            carrier.point(a) if start is None else np.asarray(start, dtype=float),
            carrier.point(b) if end is None else np.asarray(end, dtype=float),
            owner,
            source,
        )

    def midpoint(self) -> np.ndarray:
        return self.carrier.point((self.a + self.b) / 2)

    def tangent(self, s=None) -> np.ndarray:
        s = (self.a + self.b) / 2 if s is None else s
        v = self.carrier.deriv(s)
        return v if self.b >= self.a else -v

    def left_normal(self) -> np.ndarray:
        t = self.tangent()
        n = math.hypot(*t)
        return np.array([-t[1], t[0]]) / n if n > 0 else np.zeros(2)

    def reversed(self) -> Segment:
        return Segment(self.carrier, self.b, self.a, self.end, self.start, self.owner, self.source)

    def length(self) -> float:
        m = self.midpoint()
        return float(np.hypot(*(m - self.start)) + np.hypot(*(self.end - m)))

    def lo_hi(self):
        return (self.a, self.b) if self.a <= self.b else (self.b, self.a)

    def bbox(self):
        c = self.carrier
        m = (self.a + self.b) / 2
        ctrl = c.point(self.a) + (m - self.a) * 2 * c.deriv(self.a) / 2
        pts = np.array([self.start, self.end, ctrl, c.point(m)])
        return pts.min(axis=0), pts.max(axis=0)


@dataclass(frozen=True, eq=False)
class ParabolaArc:
    curve: ParabolicCurve
    start: tuple[float, float]
    end: tuple[float, float]


@dataclass(eq=False)
class PrimitiveOutline:
    loops: list[list[Segment]]
    index: int = 0

    @property
    def segments(self) -> list[Segment]:
        return [s for loop in self.loops for s in loop]


@dataclass
class VectorResult:
    primitive_outlines: list[PrimitiveOutline] = dc_field(default_factory=list)
    merged: list[Contour] = dc_field(default_factory=list)


# --------------------------------------------------------------------------
# intersections


def _compose(carrier: Carrier, params: np.ndarray) -> np.ndarray:
    """Ascending coefficients of ``H(X(s))``."""
    k, p, q, d, e, f = params
    c = carrier.coef
    sigma = p * c[:, 0] + q * c[:, 1]
    lin = d * c[:, 0] + e * c[:, 1]
    out = np.zeros(5)
    sq = k * P.polymul(sigma, sigma)
    out[: len(sq)] += sq
    out[:3] += lin
    out[0] += f
    return out


def _coincident(seg: Segment, params: np.ndarray) -> bool:
    ss = np.linspace(seg.a, seg.b, 7)
    X = seg.carrier.point(ss)
    vals = np.abs(_h(params, X))
    g = max(1.0, float(np.hypot(*_grad(params, X[3]))))
    return bool(np.all(vals < 1e-9 * g))


def _roots_on(seg: Segment, params: np.ndarray) -> list[float]:
    """Parameters on ``seg`` where the zero set of ``params`` crosses it.

    Near-tangent double roots (closer than TOUCH_TOL) cancel out.
    """
    from glyphfield.roots import real_roots

    coeffs = _compose(seg.carrier, params)
    roots = real_roots(coeffs[::-1])
    lo, hi = seg.lo_hi()
    roots = sorted(r for r in roots if lo - 1e-9 <= r <= hi + 1e-9)
    out = []
    i = 0
    while i < len(roots):
        j = i
        while j + 1 < len(roots) and roots[j + 1] - roots[i] < TOUCH_TOL:
            j += 1
        count = j - i + 1
        if count % 2 == 1:
            out.append(float(np.mean(roots[i:j + 1])))
        i = j + 1
    return out


def _interior(seg: Segment, s: float) -> bool:
    lo, hi = seg.lo_hi()
    return lo + 1e-12 < s < hi - 1e-12


def _on_segment(seg: Segment, X: np.ndarray, tol: float = 1e-7) -> float | None:
    s = seg.carrier.param(X)
    lo, hi = seg.lo_hi()
    if not (lo - 1e-9 <= s <= hi + 1e-9):
        return None
    if np.hypot(*(seg.carrier.point(s) - X)) > tol:
        return None
    return min(max(s, lo), hi)


def _pair_splits(A: Segment, B: Segment, splits: dict[int, list], ia: int, ib: int) -> None:
    """Record split points of A and B at their mutual intersections."""
    lo_a, hi_a = A.bbox()
    lo_b, hi_b = B.bbox()
    if np.any(lo_a > hi_b + 1e-7) or np.any(lo_b > hi_a + 1e-7):
        return
    if not _coincident(A, B.carrier.implicit):
        for s in _roots_on(A, B.carrier.implicit):
            X = A.carrier.point(s)
            sb = _on_segment(B, X)
            if sb is None:
                continue
            if _interior(A, s):
                splits[ia].append((s, X))
            if _interior(B, sb):
                splits[ib].append((sb, X))
    # T-junctions and overlapping runs: endpoints of one lying inside the other
    for X in (B.start, B.end):
        s = _on_segment(A, X, tol=1e-9)
        if s is not None and _interior(A, s):
            splits[ia].append((s, X))
    for X in (A.start, A.end):
        s = _on_segment(B, X, tol=1e-9)
        if s is not None and _interior(B, s):
            splits[ib].append((s, X))


def _split(seg: Segment, pts: list) -> list[Segment]:
    if not pts:
        return [seg]
    forward = seg.b >= seg.a
    pts = sorted(pts, key=lambda sx: sx[0], reverse=not forward)
    out = []
    s_prev, X_prev = seg.a, seg.start
    for s, X in pts:
        if abs(s - s_prev) < 1e-12:
            continue
        out.append(Segment(seg.carrier, s_prev, s, X_prev, np.asarray(X), seg.owner, seg.source))
        s_prev, X_prev = s, np.asarray(X)
    out.append(Segment(seg.carrier, s_prev, seg.b, X_prev, seg.end, seg.owner, seg.source))
    return out


# --------------------------------------------------------------------------
# stitching


def stitch(segments: Sequence[Segment], tol: float = STITCH_TOL) -> list[list[Segment]]:
    """Chain oriented segments into closed loops by matching end to start."""
    segs = list(segments)
    if not segs:
        return []
    starts = np.array([s.start for s in segs])
    unused = np.ones(len(segs), dtype=bool)
    loops = []
    while unused.any():
        first = int(np.argmax(unused))
        unused[first] = False
        chain = [first]
        while True:
            end = segs[chain[-1]].end
            if np.hypot(*(end - segs[first].start)) <= tol and len(chain) > 0:
                closing = np.hypot(*(end - segs[first].start))
            else:
                closing = math.inf
            d = np.hypot(*(starts - end).T)
            d[~unused] = math.inf
            j = int(np.argmin(d))
            if closing <= tol and closing <= d[j]:
                break
            if d[j] > tol:
                # one more chance for gaps left by dropped slivers
                if closing <= 10 * tol:
                    break
                if d[j] <= 10 * tol:
                    pass
                else:
                    dump = {
                        "chain": [(segs[i].start.tolist(), segs[i].end.tolist()) for i in chain],
                        "open_end": end.tolist(),
                    }
                    raise StitchFailure(f"open chain at {end.tolist()}", dump)
            unused[j] = False
            chain.append(j)
        loops.append([segs[i] for i in chain])
    return loops


# --------------------------------------------------------------------------
# clipping


def _inside_all(constraints: np.ndarray, X: np.ndarray) -> bool:
    if len(constraints) == 0:
        return True
    return bool(np.all(_h(constraints, X[None])[:, 0] < 0))


def _square_segments(owner: int = 0) -> list[Segment]:
    out = []
    for i in range(4):
        a, b = _CORNERS[i], _CORNERS[(i + 1) % 4]
        d = b - a
        n = np.array([d[1], -d[0]]) / 2.0  # outward normal
        c = _line_carrier(n, -(n @ a), SQUARE[i])
        sa, sb = c.param(a), c.param(b)
        out.append(Segment(c, sa, sb, a.copy(), b.copy(), owner, -1 - i))
    return out


def _orient_new(seg: Segment) -> Segment:
    g = _grad(seg.carrier.implicit, seg.midpoint())
    return seg.reversed() if seg.left_normal() @ g > 0 else seg


def clip_primitive(curves: Sequence[ParabolicCurve] | np.ndarray, index: int = 0) -> PrimitiveOutline | None:
    """Boundary of ``{max_j H_j < 0}`` inside the canvas square, or None if empty."""
    params = np.asarray(
        [c.as_array() for c in curves] if not isinstance(curves, np.ndarray) else curves, dtype=float
    ).reshape(-1, 6)
    segments = _square_segments(index)
    constraints = SQUARE.copy()
    for j, cp in enumerate(params):
        carriers, const = carriers_of(cp)
        if not carriers:
            if const is not None and const >= 0:
                return None
            constraints = np.vstack([constraints, cp])
            continue
        new = [Segment.make(c, -SPAN, SPAN, index, j) for c in carriers]
        splits = {i: [] for i in range(len(segments) + len(new))}
        for ia, A in enumerate(segments):
            for ib, B in enumerate(new):
                _pair_splits(A, B, splits, ia, len(segments) + ib)
        kept = []
        for ia, A in enumerate(segments):
            for piece in _split(A, splits[ia]):
                m = piece.midpoint()
                v = float(_h(cp, m[None])[0])
                if v < -EPS_KEEP:
                    kept.append(piece)
                elif abs(v) <= EPS_KEEP:
                    probe = m + PROBE * piece.left_normal()
                    if _h(cp, probe[None])[0] < 0:
                        kept.append(piece)
        for ib, B in enumerate(new):
            for piece in _split(B, splits[len(segments) + ib]):
                piece = _orient_new(piece)
                m = piece.midpoint()
                v = float(np.max(_h(constraints, m[None])))
                if v < -EPS_KEEP:
                    kept.append(piece)
                elif abs(v) <= EPS_KEEP:
                    ln = piece.left_normal()
                    if _inside_all(constraints, m + PROBE * ln) and _inside_all(constraints, m - PROBE * ln):
                        kept.append(piece)
        constraints = np.vstack([constraints, cp])
        segments = kept
        if not segments:
            return None
    segments = [s for s in segments if s.length() >= MIN_LENGTH]
    if not segments:
        return None
    try:
        loops = stitch(segments)
    except StitchFailure as exc:
        raise NonManifoldBoundary(f"primitive {index}: {exc}", exc.dump) from None
    return PrimitiveOutline(loops, index)


# --------------------------------------------------------------------------
# conversion


def arc_to_bezier(arc: ParabolaArc, _depth: int = 0) -> list[QuadBezier]:
    """Exact quadratic Bézier(s) for a parabola arc.

    The off-curve point is where the tangents at the two ends meet. If that
    point is more than ten chord lengths away the arc is halved at its
    parameter midpoint (at most four pieces in total).
    """
    params = ParabolicCurve.as_array(arc.curve)
    a = np.asarray(arc.start, dtype=float)
    b = np.asarray(arc.end, dtype=float)
    ga, gb = _grad(params, a), _grad(params, b)
    ta, tb = np.array([-ga[1], ga[0]]), np.array([-gb[1], gb[0]])
    den = ta[0] * tb[1] - ta[1] * tb[0]
    chord = float(np.hypot(*(b - a)))
    if chord < 1e-15 or abs(den) < 1e-14 * (np.hypot(*ta) * np.hypot(*tb) + 1e-300):
        raise ParallelTangents("arc end tangents are parallel")
    lam = ((b - a)[0] * tb[1] - (b - a)[1] * tb[0]) / den
    ctrl = a + lam * ta
    if np.hypot(*(ctrl - (a + b) / 2)) > GUARD * chord and _depth < 2:
        carriers, _ = carriers_of(params)
        arcs = [c for c in carriers if c.kind == "arc"]
        if arcs:
            c = arcs[0]
            m = c.point((c.param(a) + c.param(b)) / 2)
            return arc_to_bezier(ParabolaArc(arc.curve, arc.start, tuple(m)), _depth + 1) + arc_to_bezier(
                ParabolaArc(arc.curve, tuple(m), arc.end), _depth + 1
            )
    return [QuadBezier(tuple(map(float, a)), tuple(map(float, ctrl)), tuple(map(float, b)))]


def _segment_to_quads(seg: Segment) -> list[QuadBezier]:
    a, b = seg.start, seg.end
    if seg.carrier.kind == "arc":
        try:
            return arc_to_bezier(ParabolaArc(ParabolicCurve.from_array(seg.carrier.implicit), tuple(a), tuple(b)))
        except ParallelTangents:
            pass
    return [QuadBezier.line(tuple(map(float, a)), tuple(map(float, b)))]


def _loop_to_contour(loop: Sequence[Segment]) -> Contour | None:
    quads: list[QuadBezier] = []
    for seg in loop:
        quads.extend(_segment_to_quads(seg))
    quads = [q for q in quads if not q.is_degenerate()]
    if not quads:
        return None
    # close exactly: each curve ends where the next begins
    fixed = [QuadBezier(q.p0, q.p1, quads[(i + 1) % len(quads)].p0) for i, q in enumerate(quads)]
    return Contour(tuple(fixed))


# --------------------------------------------------------------------------
# union


def _primitive_value(params: np.ndarray, X: np.ndarray) -> float:
    """Primitive clipped to the canvas: max over its curves and the square."""
    return float(max(np.max(_h(params, X[None])), np.max(_h(SQUARE, X[None]))))


def merge_outlines(outlines: Sequence[PrimitiveOutline], field: Field) -> list[Contour]:
    """Boundary of the union of the primitive regions as closed contours."""
    params = field.params
    segs = [s for o in outlines for s in o.segments]
    owners = [o.index for o in outlines for _ in o.segments]
    active = sorted(set(owners))
    splits: dict[int, list] = {i: [] for i in range(len(segs))}
    for ia in range(len(segs)):
        for ib in range(ia + 1, len(segs)):
            if owners[ia] != owners[ib]:
                _pair_splits(segs[ia], segs[ib], splits, ia, ib)
    kept = []
    for ia, A in enumerate(segs):
        i = owners[ia]
        for piece in _split(A, splits[ia]):
            if piece.length() < MIN_LENGTH:
                continue
            m = piece.midpoint()
            ln = piece.left_normal()
            keep = True
            for j in active:
                if j == i:
                    continue
                v = _primitive_value(params[j], m)
                if v > EPS_KEEP:
                    continue
                if v < -EPS_KEEP:
                    keep = False
                    break
                outside = _primitive_value(params[j], m - PROBE * ln) > 0
                if not outside:
                    keep = False  # the other primitive covers our exterior side
                    break
                inside = _primitive_value(params[j], m + PROBE * ln) < 0
                if inside and j < i:
                    keep = False  # same boundary, same side: lower index wins
                    break
            if keep:
                kept.append(piece)
    loops = stitch(kept)
    contours = [c for c in (_loop_to_contour(loop) for loop in loops) if c is not None]
    return orient_contours(contours)


def vectorize(field: Field) -> VectorResult:
    field = field.normalized()
    outlines = []
    for i in range(field.n_p):
        out = clip_primitive(field.params[i], index=i)
        if out is not None:
            outlines.append(out)
    return VectorResult(outlines, merge_outlines(outlines, field))


def primitive_contours(outline: PrimitiveOutline) -> list[Contour]:
    return [c for c in (_loop_to_contour(loop) for loop in outline.loops) if c is not None]


def debug_svg(result: VectorResult, canvas_px: int = 128) -> str:
    """One ``<g>`` layer per primitive outline, plus the merged outline."""
    layers = []
    for o in result.primitive_outlines:
        body = write_svg(primitive_contours(o), canvas_px)
        paths = [ln for ln in body.splitlines() if ln.startswith("<path")]
        layers.append(f'<g id="primitive-{o.index}" fill="none" stroke="black">' + "".join(paths) + "</g>")
    merged = [ln for ln in write_svg(result.merged, canvas_px).splitlines() if ln.startswith("<path")]
    layers.append('<g id="merged" fill-opacity="0.3">' + "".join(merged) + "</g>")
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{canvas_px}" height="{canvas_px}" '
        f'viewBox="0 0 {canvas_px} {canvas_px}">\n' + "\n".join(layers) + "\n</svg>\n"
    )
