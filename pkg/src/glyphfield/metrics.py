"""Image reconstruction metrics: L1, ink IoU, PSNR."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from glyphfield.errors import ShapeMismatch

INK_THRESHOLD = 0.5


@dataclass(frozen=True)
class MetricReport:
    l1: float
    iou: float
    psnr: float

    def csv(self) -> str:
        return f"{self.l1:.6f},{self.iou:.6f},{self.psnr:.6f}"


def ink_iou(a_mask: np.ndarray, b_mask: np.ndarray) -> float:
    """IoU of two boolean masks; two empty masks count as identical."""
    a_mask = np.asarray(a_mask, dtype=bool)
    b_mask = np.asarray(b_mask, dtype=bool)
    if a_mask.shape != b_mask.shape:
        raise ShapeMismatch(f"{a_mask.shape} vs {b_mask.shape}")
    union = np.count_nonzero(a_mask | b_mask)
    if union == 0:
        return 1.0
    return np.count_nonzero(a_mask & b_mask) / union


def compare(a: np.ndarray, b: np.ndarray) -> MetricReport:
    """Compare two images in [0, 1]; ink is anything below 0.5."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ShapeMismatch(f"image shapes differ: {a.shape} vs {b.shape}")
    diff = a - b
    l1 = float(np.mean(np.abs(diff)))
    mse = float(np.mean(diff * diff))
    psnr = math.inf if mse == 0.0 else 10.0 * math.log10(1.0 / mse)
    iou = ink_iou(a < INK_THRESHOLD, b < INK_THRESHOLD)
    return MetricReport(l1, float(iou), psnr)


def aggregate(reports) -> dict[str, dict[str, float]]:
    """Mean/min/max of each metric over a collection of reports."""
    reports = list(reports)
    out = {}
    for name in ("l1", "iou", "psnr"):
        vals = np.array([getattr(r, name) for r in reports], dtype=float)
        out[name] = {"mean": float(vals.mean()), "min": float(vals.min()), "max": float(vals.max())}
    return out
