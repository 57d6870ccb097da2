"""Reconstruct vector glyphs as unions of parabola-bounded primitives.

A glyph outline (quadratic Béziers) is turned into exact signed-distance
supervision, an implicit field of parabolic curves is fitted against it with
a differentiable rasterizer, and the fitted field is converted back into
quadratic-Bézier SVG outlines.
"""

from glyphfield.glyph_ir import (
    Contour,
    GlyphOutline,
    QuadBezier,
    normalize,
    parse_svg,
    write_svg,
)
from glyphfield.pseudo_field import Field, ParabolicCurve, RenderConfig, render
from glyphfield.fit import FitConfig, FitReport, LossWeights, fit
from glyphfield.metrics import MetricReport, compare

__all__ = [
    "Contour",
    "Field",
    "FitConfig",
    "FitReport",
    "GlyphOutline",
    "LossWeights",
    "MetricReport",
    "ParabolicCurve",
    "QuadBezier",
    "RenderConfig",
    "compare",
    "fit",
    "normalize",
    "parse_svg",
    "render",
    "write_svg",
]
