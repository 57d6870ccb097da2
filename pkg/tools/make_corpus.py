#!/usr/bin/env python3
"""Regenerate the bundled mini-corpus from the DejaVu fonts shipped with matplotlib.

Development tool only; needs fontTools and matplotlib, which the package
itself does not import.

    python tools/make_corpus.py src/glyphfield/data/corpus
"""

import argparse
import os

import matplotlib
from fontTools.pens.basePen import BasePen
from fontTools.pens.boundsPen import BoundsPen
from fontTools.ttLib import TTFont

GLYPHS = [
    ("DejaVuSans.ttf", "O", "sans_O"),
    ("DejaVuSans.ttf", "C", "sans_C"),
    ("DejaVuSans.ttf", "L", "sans_L"),
    ("DejaVuSans.ttf", "T", "sans_T"),
    ("DejaVuSans.ttf", "D", "sans_D"),
    ("DejaVuSerif.ttf", "I", "serif_I"),
    ("DejaVuSerif.ttf", "o", "serif_o"),
    ("DejaVuSerif.ttf", "u", "serif_u"),
    ("DejaVuSerif.ttf", "c", "serif_c"),
    ("DejaVuSerif.ttf", "J", "serif_J"),
]

FILL = 0.8  # glyph's longer side occupies this fraction of the square canvas


class SvgPen(BasePen):
    def __init__(self, glyphset, flip):
        super().__init__(glyphset)
        self.parts = []
        self.flip = flip

    def _pt(self, p):
        return f"{p[0]:g} {self.flip - p[1]:g}"

    def _moveTo(self, p):
        self.parts.append("M " + self._pt(p))

    def _lineTo(self, p):
        self.parts.append("L " + self._pt(p))

    def _qCurveToOne(self, p1, p2):
        self.parts.append(f"Q {self._pt(p1)} {self._pt(p2)}")

    def _curveToOne(self, p1, p2, p3):
        self.parts.append(f"C {self._pt(p1)} {self._pt(p2)} {self._pt(p3)}")

    def _closePath(self):
        self.parts.append("Z")


def glyph_svg(font_path, char):
    font = TTFont(font_path)
    gs = font.getGlyphSet()
    name = font.getBestCmap()[ord(char)]
    bp = BoundsPen(gs)
    gs[name].draw(bp)
    x0, y0, x1, y1 = bp.bounds
    flip = 0.0
    pen = SvgPen(gs, flip)
    gs[name].draw(pen)
    side = max(x1 - x0, y1 - y0) / FILL
    cx, cy = (x0 + x1) / 2, flip - (y0 + y1) / 2
    vb = f"{cx - side / 2:g} {cy - side / 2:g} {side:g} {side:g}"
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{vb}">\n'
        f'<path d="{" ".join(pen.parts)}"/>\n</svg>\n'
    )


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("outdir")
    args = ap.parse_args()
    fonts = os.path.join(os.path.dirname(matplotlib.__file__), "mpl-data", "fonts", "ttf")
    os.makedirs(args.outdir, exist_ok=True)
    for font, char, stem in GLYPHS:
        with open(os.path.join(args.outdir, stem + ".svg"), "w") as fh:
            fh.write(glyph_svg(os.path.join(fonts, font), char))
        print(stem)


if __name__ == "__main__":
    main()
