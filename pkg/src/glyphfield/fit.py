"""Direct per-glyph fitting of a parabolic field.

The objective is a weighted sum of four terms: image MSE through the
smoothstep renderer, a sign-disagreement hinge on the grid samples, the
same hinge on the near-contour samples, and a regularizer that keeps
``p^2 + q^2`` near one and ``k^2`` above a floor. Gradients are analytic
and routed through the min/max selection; updates are Adam with a cosine
learning-rate decay.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field as dc_field
from typing import NamedTuple

import numpy as np

from glyphfield.errors import DivergenceDetected, EmptyInput, NoInterior, ShapeMismatch
from glyphfield.exact_sdf import ContourSamples, SdfGrid
from glyphfield.metrics import MetricReport, compare
from glyphfield.pseudo_field import (
    DEFAULT_GAMMA,
    DEFAULT_NA,
    DEFAULT_NP,
    Field,
    RenderConfig,
    quantize,
    field_values,
    render,
    scatter_gradient,
    shade,
    shade_derivative,
)

INIT_K = 0.7
INIT_RADIUS = 0.15


@dataclass(frozen=True)
class LossWeights:
    image: float = 1.0
    grid: float = 100.0
    contour: float = 1000.0
    regular: float = 1.0
    ksq: float = 0.1
    k_min_sq: float = 0.25

    def __post_init__(self):
        for name in ("image", "grid", "contour", "regular", "ksq", "k_min_sq"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"loss weight {name} must be finite and >= 0, got {v}")


@dataclass(frozen=True)
class FitConfig:
    steps: int = 2000
    learning_rate: float = 1e-2
    final_learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    seed: int = 0
    n_p: int = DEFAULT_NP
    n_a: int = DEFAULT_NA
    gamma: float = DEFAULT_GAMMA

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if not self.learning_rate > 0 or not self.final_learning_rate > 0:
            raise ValueError("learning rates must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("Adam betas must lie in [0, 1)")
        if self.n_p < 1 or self.n_a < 1:
            raise ValueError("n_p and n_a must be >= 1")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")

    def lr_at(self, step: int) -> float:
        """Cosine decay from ``learning_rate`` to ``final_learning_rate``."""
        if self.steps <= 1:
            return self.learning_rate
        frac = step / (self.steps - 1)
        lo, hi = self.final_learning_rate, self.learning_rate
        return lo + 0.5 * (hi - lo) * (1.0 + math.cos(math.pi * frac))


class LossBreakdown(NamedTuple):
    image: float
    grid: float
    contour: float
    regular: float
    total: float


@dataclass
class FitReport:
    history: list[LossBreakdown] = dc_field(default_factory=list)
    metrics: MetricReport | None = None
    elapsed: float = 0.0
    best_step: int = 0
    best_loss: float = math.inf

    def to_text(self) -> str:
        lines = [
            f"{i} {h.image:.9g} {h.grid:.9g} {h.contour:.9g} {h.regular:.9g} {h.total:.9g}"
            for i, h in enumerate(self.history)
        ]
        if self.metrics is not None:
            lines.append(f"# final {self.metrics.csv()} best_step={self.best_step} best_loss={self.best_loss:.9g}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> FitReport:
        rep = cls()
        for line in text.splitlines():
            if line.startswith("# final "):
                body = line[len("# final "):].split()
                l1, iou, psnr = (float(v) for v in body[0].split(","))
                rep.metrics = MetricReport(l1, iou, psnr)
                for kv in body[1:]:
                    k, v = kv.split("=")
                    if k == "best_step":
                        rep.best_step = int(v)
                    elif k == "best_loss":
                        rep.best_loss = float(v)
            elif line.strip() and not line.startswith("#"):
                vals = line.split()
                rep.history.append(LossBreakdown(*(float(v) for v in vals[1:6])))
        return rep


# --------------------------------------------------------------------------
# individual losses


def loss_image(rendered: np.ndarray, target: np.ndarray) -> float:
    rendered = np.asarray(rendered, dtype=float)
    target = np.asarray(target, dtype=float)
    if rendered.shape != target.shape:
        raise ShapeMismatch(f"rendered {rendered.shape} vs target {target.shape}")
    return float(np.mean((rendered - target) ** 2))


def loss_sdf_hinge(G_vals, D_vals) -> float:
    """Mean of ``ReLU(-G * D)``: penalizes only sign disagreements."""
    G = np.asarray(G_vals, dtype=float).ravel()
    D = np.asarray(D_vals, dtype=float).ravel()
    if G.shape != D.shape:
        raise ShapeMismatch(f"{G.size} pseudo distances vs {D.size} exact distances")
    if G.size == 0:
        raise EmptyInput("hinge loss needs at least one sample")
    return float(np.mean(np.maximum(-G * D, 0.0)))


def _params(field_or_params) -> np.ndarray:
    if isinstance(field_or_params, Field):
        return field_or_params.params
    return np.asarray(field_or_params, dtype=float)


def loss_regular(field: Field | np.ndarray, k_min_sq: float, lambda_ksq: float) -> float:
    p = _params(field)
    n = p.shape[0] * p.shape[1]
    k2 = p[..., 0] ** 2
    norm = p[..., 1] ** 2 + p[..., 2] ** 2 - 1.0
    return float((lambda_ksq * np.sum(np.maximum(k_min_sq - k2, 0.0)) + np.sum(norm * norm)) / n)


def _regular_grad(p: np.ndarray, k_min_sq: float, lambda_ksq: float) -> np.ndarray:
    n = p.shape[0] * p.shape[1]
    g = np.zeros_like(p)
    k = p[..., 0]
    active = (k_min_sq - k * k) > 0
    g[..., 0] = np.where(active, -2.0 * k * lambda_ksq, 0.0) / n
    norm = p[..., 1] ** 2 + p[..., 2] ** 2 - 1.0
    g[..., 1] = 4.0 * norm * p[..., 1] / n
    g[..., 2] = 4.0 * norm * p[..., 2] / n
    return g


def loss_total(
    field: Field,
    rendered: np.ndarray,
    target: np.ndarray,
    grid: SdfGrid,
    contour: ContourSamples | None,
    weights: LossWeights,
) -> tuple[float, LossBreakdown]:
    """Weighted sum of the four losses plus the per-term breakdown (unweighted)."""
    li = loss_image(rendered, target)
    pts = grid.points()
    g_grid, _ = field_values(field.params, pts[:, 0], pts[:, 1])
    lg = loss_sdf_hinge(g_grid, grid.samples.ravel())
    if contour is not None and len(contour):
        g_c, _ = field_values(field.params, contour.xy[:, 0], contour.xy[:, 1])
        lc = loss_sdf_hinge(g_c, contour.d)
    else:
        lc = 0.0
    lr = loss_regular(field, weights.k_min_sq, weights.ksq)
    total = weights.image * li + weights.grid * lg + weights.contour * lc + weights.regular * lr
    return total, LossBreakdown(li, lg, lc, lr, total)


class Objective:
    """The full loss as a function of the raw ``(n_p, n_a, 6)`` parameter array."""

    def __init__(
        self,
        target: np.ndarray,
        grid: SdfGrid,
        contour: ContourSamples | None,
        weights: LossWeights = LossWeights(),
        gamma: float = DEFAULT_GAMMA,
    ):
        target = np.asarray(target, dtype=float)
        if target.shape != (grid.height, grid.width):
            raise ShapeMismatch(f"target {target.shape} vs grid {(grid.height, grid.width)}")
        self.target = target.ravel()
        self.shape = target.shape
        self.weights = weights
        self.gamma = gamma
        gp = grid.points()
        self.grid_d = grid.samples.ravel()
        self.n_grid = len(gp)
        if contour is not None and len(contour):
            cp, self.contour_d = contour.xy, contour.d
        else:
            cp, self.contour_d = np.zeros((0, 2)), np.zeros(0)
        self.n_contour = len(cp)
        pts = np.concatenate([gp, cp], axis=0)
        self.xs = np.ascontiguousarray(pts[:, 0])
        self.ys = np.ascontiguousarray(pts[:, 1])

    def __call__(self, params: np.ndarray, grad: bool = True):
        w = self.weights
        params = np.asarray(params, dtype=float)
        g, sel = field_values(params, self.xs, self.ys)
        gg, gc = g[: self.n_grid], g[self.n_grid:]

        img = shade(gg, self.gamma)
        resid = img - self.target
        li = float(np.mean(resid * resid))

        prod = gg * self.grid_d
        lg = float(np.mean(np.maximum(-prod, 0.0)))
        if self.n_contour:
            cprod = gc * self.contour_d
            lc = float(np.mean(np.maximum(-cprod, 0.0)))
        else:
            lc = 0.0
        lr = loss_regular(params, w.k_min_sq, w.ksq)
        total = w.image * li + w.grid * lg + w.contour * lc + w.regular * lr
        parts = LossBreakdown(li, lg, lc, lr, total)
        if not grad:
            return parts, None

        dg = np.empty_like(g)
        dg[: self.n_grid] = (
            w.image * 2.0 * resid * shade_derivative(gg, self.gamma) / self.n_grid
            + w.grid * np.where(prod < 0, -self.grid_d, 0.0) / self.n_grid
        )
        if self.n_contour:
            dg[self.n_grid:] = w.contour * np.where(cprod < 0, -self.contour_d, 0.0) / self.n_contour
        out = scatter_gradient(params, self.xs, self.ys, sel, dg)
        out += w.regular * _regular_grad(params, w.k_min_sq, w.ksq)
        return parts, out


# --------------------------------------------------------------------------
# initialization


def _farthest_points(points: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    chosen = [int(rng.integers(len(points)))]
    dist = np.sum((points - points[chosen[0]]) ** 2, axis=1)
    for _ in range(1, n):
        nxt = int(np.argmax(dist))
        chosen.append(nxt)
        dist = np.minimum(dist, np.sum((points - points[nxt]) ** 2, axis=1))
    return points[chosen]


def blob_curves(center, n_a: int, k: float = INIT_K, radius: float = INIT_RADIUS) -> np.ndarray:
    """``n_a`` curves whose common inside is a small convex blob around ``center``.

    Curve ``j`` is ``k (t_j . (x - c))^2 + n_j . (x - c) - radius`` with
    ``n_j`` at angle ``2 pi j / n_a`` and ``t_j`` its left perpendicular,
    expanded into the ``k, p, q, d, e, f`` form.
    """
    cx, cy = center
    out = np.empty((n_a, 6))
    for j in range(n_a):
        th = 2.0 * math.pi * j / n_a
        nx, ny = math.cos(th), math.sin(th)
        p, q = -ny, nx
        tc = p * cx + q * cy
        out[j] = (
            k,
            p,
            q,
            nx - 2.0 * k * tc * p,
            ny - 2.0 * k * tc * q,
            k * tc * tc - (nx * cx + ny * cy) - radius,
        )
    return out


def init_field(grid: SdfGrid, n_p: int = DEFAULT_NP, n_a: int = DEFAULT_NA, seed: int = 0) -> Field:
    """Seed ``n_p`` blobs at farthest-point-sampled interior grid samples."""
    pts = grid.points()
    inside = grid.samples.ravel() < 0
    if not inside.any():
        raise NoInterior("grid has no interior samples to seed primitives")
    rng = np.random.default_rng(seed)
    centers = _farthest_points(pts[inside], n_p, rng)
    return Field(np.stack([blob_curves(c, n_a) for c in centers]))


# --------------------------------------------------------------------------
# optimizer


def score(field: Field, target: np.ndarray, gamma: float = DEFAULT_GAMMA) -> MetricReport:
    """Metrics of the field's 8-bit rendering against ``target``, as ``render`` + ``compare`` would report."""
    target = np.asarray(target, dtype=float)
    rendered = render(field, RenderConfig(gamma, target.shape[1], target.shape[0]))
    return compare(quantize(rendered) / 255.0, target)


def fit(
    target: np.ndarray,
    grid: SdfGrid,
    contour: ContourSamples | None,
    weights: LossWeights = LossWeights(),
    cfg: FitConfig = FitConfig(),
    init: Field | None = None,
    callback=None,
) -> tuple[Field, FitReport]:
    """Run ``cfg.steps`` Adam updates and return the best iterate seen.

    ``history[t]`` is the loss of the parameters *before* update ``t``; the
    parameters after the last update are scored too and may be returned.
    """
    start = time.perf_counter()
    objective = Objective(target, grid, contour, weights, cfg.gamma)
    if init is None:
        init = init_field(grid, cfg.n_p, cfg.n_a, cfg.seed)
    theta = np.array(init.params, dtype=float)
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    report = FitReport()
    best = theta.copy()

    def consider(parts, params, step):
        nonlocal best
        if parts.total < report.best_loss:
            report.best_loss = parts.total
            report.best_step = step
            best = params.copy()

    for step in range(cfg.steps):
        with np.errstate(over="ignore", invalid="ignore"):
            parts, grad = objective(theta)
        if not (math.isfinite(parts.total) and np.all(np.isfinite(grad))):
            report.elapsed = time.perf_counter() - start
            raise DivergenceDetected(f"loss became non-finite at step {step}", report)
        report.history.append(parts)
        consider(parts, theta, step)
        if callback is not None:
            callback(step, parts)

        t = step + 1
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad * grad
        mhat = m / (1.0 - cfg.beta1**t)
        vhat = v / (1.0 - cfg.beta2**t)
        theta = theta - cfg.lr_at(step) * mhat / (np.sqrt(vhat) + cfg.epsilon)

    parts, _ = objective(theta, grad=False)
    if math.isfinite(parts.total):
        consider(parts, theta, cfg.steps)

    result = Field(best)
    report.metrics = score(result, target, cfg.gamma)
    report.elapsed = time.perf_counter() - start
    return result, report
