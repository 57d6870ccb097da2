"""Glue between the modules: run configuration and the glyph-to-supervision step."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from glyphfield.exact_sdf import (
    DEFAULT_BAND,
    DEFAULT_CONTOUR_SAMPLES,
    ContourSamples,
    SdfGrid,
    compute_grid_sdf,
    sample_contour_sdf,
)
from glyphfield.fit import FitConfig, LossWeights
from glyphfield.glyph_ir import GlyphOutline
from glyphfield.pseudo_field import DEFAULT_GAMMA, DEFAULT_NA, DEFAULT_NP, RenderConfig, shade


@dataclass(frozen=True)
class RunConfig:
    grid: int = 128
    np: int = DEFAULT_NP
    na: int = DEFAULT_NA
    gamma: float = DEFAULT_GAMMA
    steps: int = 2000
    lr: float = 1e-2
    lr_final: float = 1e-3
    seed: int = 0
    lambda_image: float = 1.0
    lambda_grid: float = 100.0
    lambda_contour: float = 1000.0
    lambda_regular: float = 1.0
    lambda_ksq: float = 0.1
    kmin_sq: float = 0.25
    band: float = DEFAULT_BAND
    mc: int = DEFAULT_CONTOUR_SAMPLES
    size: int = 128
    jobs: int = 1

    def validate(self) -> RunConfig:
        """Build every module config once so bad values fail before any work."""
        if self.grid < 8:
            raise ValueError("grid must be >= 8")
        if self.mc < 1:
            raise ValueError("mc must be >= 1")
        if not self.band > 0:
            raise ValueError("band must be positive")
        if self.size < 1 or self.jobs < 1:
            raise ValueError("size and jobs must be >= 1")
        self.weights()
        self.fit_config()
        RenderConfig(self.gamma, self.size, self.size)
        return self

    def weights(self) -> LossWeights:
        return LossWeights(
            self.lambda_image,
            self.lambda_grid,
            self.lambda_contour,
            self.lambda_regular,
            self.lambda_ksq,
            self.kmin_sq,
        )

    def fit_config(self) -> FitConfig:
        return FitConfig(
            steps=self.steps,
            learning_rate=self.lr,
            final_learning_rate=min(self.lr_final, self.lr),
            seed=self.seed,
            n_p=self.np,
            n_a=self.na,
            gamma=self.gamma,
        )

    @classmethod
    def keys(cls) -> list[str]:
        return [f.name for f in dataclasses.fields(cls)]

    def replace(self, **kw) -> RunConfig:
        return dataclasses.replace(self, **kw)


def parse_config_text(text: str) -> dict[str, str]:
    """``key = value`` lines; ``#`` comments; dashes in keys become underscores."""
    out = {}
    for n, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {n}: expected key=value")
        k, v = (s.strip() for s in line.split("=", 1))
        k = k.replace("-", "_")
        if k not in RunConfig.keys():
            raise ValueError(f"config line {n}: unknown key {k!r}")
        out[k] = v
    return out


def coerce(values: dict[str, str]) -> dict:
    types = {f.name: f.type for f in dataclasses.fields(RunConfig)}
    out = {}
    for k, v in values.items():
        out[k] = int(v) if types[k] in ("int", int) else float(v)
    return out


def target_image(grid: SdfGrid, gamma: float = DEFAULT_GAMMA) -> np.ndarray:
    """Raster target: exact distances pushed through the smoothstep shader."""
    return shade(grid.samples, gamma)


def prepare(outline: GlyphOutline, cfg: RunConfig = RunConfig()) -> tuple[SdfGrid, ContourSamples, np.ndarray]:
    grid = compute_grid_sdf(outline, cfg.grid, cfg.grid)
    contour = sample_contour_sdf(outline, cfg.mc, cfg.band, cfg.seed)
    return grid, contour, target_image(grid, cfg.gamma)


def corpus_paths() -> list[Path]:
    """The bundled mini-corpus of SVG glyphs, sorted by name."""
    root = resources.files("glyphfield") / "data" / "corpus"
    return sorted(Path(str(p)) for p in root.iterdir() if p.name.endswith(".svg"))
