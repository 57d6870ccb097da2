import numpy as np
import pytest

from glyphfield.fit import blob_curves
from glyphfield.glyph_ir import Contour, GlyphOutline, QuadBezier, parse_svg
from glyphfield.pipeline import corpus_paths
from glyphfield.pseudo_field import Field


def square_outline(half=0.5):
    pts = [(-half, -half), (half, -half), (half, half), (-half, half)]
    curves = [QuadBezier.line(pts[i], pts[(i + 1) % 4]) for i in range(4)]
    return GlyphOutline([Contour(curves)])


def ring_outline():
    outer = square_outline(0.6).contours[0]
    inner = square_outline(0.3).contours[0].reversed()
    return GlyphOutline([outer, inner])


def random_blob_field(rng, n_p=4, n_a=4, spread=0.55):
    prims = [
        blob_curves(rng.uniform(-spread, spread, 2), n_a, k=rng.uniform(0.5, 1.5), radius=rng.uniform(0.15, 0.35))
        for _ in range(n_p)
    ]
    return Field(np.stack(prims))


@pytest.fixture(scope="session")
def corpus():
    return {p.stem: parse_svg(p.read_bytes()) for p in corpus_paths()}


@pytest.fixture
def square():
    return square_outline()


@pytest.fixture
def ring():
    return ring_outline()


_verdicts = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_verdicts] = []


@pytest.fixture
def verdict(request):
    """Record one acceptance line; the summary prints them all at the end of the run."""

    def record(name: str, ok: bool, detail: str = "") -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else "")
        request.config.stash[_verdicts].append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_verdicts, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
