"""Command-line entry point: ``glyphfield <command> ...``.

Exit codes: 0 success, 2 input error, 3 fit divergence, 4 vectorization failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from glyphfield import exact_sdf
from glyphfield.errors import DivergenceDetected, FormatError, GlyphFieldError, NonManifoldBoundary
from glyphfield.fit import fit, score
from glyphfield.glyph_ir import parse_svg, write_svg
from glyphfield.pipeline import RunConfig, coerce, parse_config_text, prepare
from glyphfield.pseudo_field import Field, RenderConfig, interpolate, read_pgm, render, write_pgm
from glyphfield.vectorize import debug_svg, vectorize
from glyphfield.metrics import compare

log = logging.getLogger("glyphfield")

EXIT_INPUT = 2
EXIT_DIVERGED = 3
EXIT_VECTORIZE = 4


class InputError(Exception):
    pass


def _add_run_flags(p: argparse.ArgumentParser, names: list[str]) -> None:
    helps = {
        "grid": "SDF grid / target image resolution",
        "np": "number of primitives",
        "na": "curves per primitive",
        "gamma": "renderer transition half-width",
        "steps": "optimizer steps",
        "lr": "initial learning rate",
        "lr-final": "final learning rate of the cosine schedule",
        "seed": "random seed",
        "lambda-image": "image loss weight",
        "lambda-grid": "grid SDF loss weight",
        "lambda-contour": "contour SDF loss weight",
        "lambda-regular": "regularizer weight",
        "lambda-ksq": "k^2 floor weight inside the regularizer",
        "kmin-sq": "k^2 floor",
        "band": "near-contour sampling half-width",
        "mc": "number of near-contour samples",
        "size": "output raster / canvas size in pixels",
        "jobs": "worker processes for several targets",
    }
    for name in names:
        key = name.replace("-", "_")
        kind = int if RunConfig.__dataclass_fields__[key].type in ("int", int) else float
        p.add_argument(f"--{name}", dest=key, type=kind, default=None, help=helps[name])
    p.add_argument("--config", type=Path, help="key=value file (flags override it)")


def _run_config(args) -> RunConfig:
    values = {}
    if getattr(args, "config", None) is not None:
        try:
            values.update(coerce(parse_config_text(args.config.read_text())))
        except OSError as exc:
            raise InputError(f"{args.config}: {exc}") from None
        except ValueError as exc:
            raise InputError(f"{args.config}: {exc}") from None
    for key in RunConfig.keys():
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    try:
        return RunConfig(**values).validate()
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid configuration: {exc}") from None


def _read(path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None


def _load_field(path) -> Field:
    try:
        return Field.from_bytes(_read(path))
    except FormatError as exc:
        raise InputError(f"{path}: {exc}") from None


# --------------------------------------------------------------------------


def cmd_sdf_gen(args) -> int:
    cfg = _run_config(args)
    try:
        outline = parse_svg(_read(args.svg))
    except GlyphFieldError as exc:
        raise InputError(f"{args.svg}: {exc}") from None
    except Exception as exc:  # malformed XML and friends
        raise InputError(f"{args.svg}: {exc}") from None
    grid, contour, target = prepare(outline, cfg)
    prefix = str(args.out_prefix)
    Path(prefix + ".sdf").write_bytes(exact_sdf.write_sdf(grid))
    Path(prefix + ".sdc").write_bytes(exact_sdf.write_sdc(contour))
    Path(prefix + ".pgm").write_bytes(write_pgm(target))
    log.info("wrote %s.{sdf,sdc,pgm}", prefix)
    return 0


def _load_target(prefix: str):
    try:
        grid = exact_sdf.read_sdf(_read(prefix + ".sdf"))
        contour = exact_sdf.read_sdc(_read(prefix + ".sdc"))
        target = read_pgm(_read(prefix + ".pgm"))
    except FormatError as exc:
        raise InputError(f"{prefix}: {exc}") from None
    if target.shape != (grid.height, grid.width):
        raise InputError(f"{prefix}: target image {target.shape} does not match SDF grid")
    return grid, contour, target


def _fit_one(prefix: str, out: str, cfg: RunConfig) -> int:
    grid, contour, target = _load_target(prefix)
    try:
        field, report = fit(target, grid, contour, cfg.weights(), cfg.fit_config())
    except DivergenceDetected as exc:
        if exc.report is not None:
            Path(out + ".report").write_text(exc.report.to_text())
        log.error("%s: %s", prefix, exc)
        return EXIT_DIVERGED
    data = field.to_bytes()
    # score what was stored: the file holds float32 parameters
    report.metrics = score(Field.from_bytes(data), target, cfg.gamma)
    Path(out + ".pfd").write_bytes(data)
    Path(out + ".report").write_text(report.to_text())
    print(f"{prefix},{report.metrics.csv()}")
    return 0


def cmd_fit(args) -> int:
    cfg = _run_config(args)
    targets = [str(t) for t in args.target_prefix]
    if len(targets) == 1:
        return _fit_one(targets[0], str(args.out), cfg)
    os.makedirs(args.out, exist_ok=True)
    outs = [str(Path(args.out) / Path(t).name) for t in targets]
    if cfg.jobs == 1:
        codes = [_fit_one(t, o, cfg) for t, o in zip(targets, outs)]
    else:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            codes = list(pool.map(_fit_one, targets, outs, [cfg] * len(targets)))
    return max(codes)


def cmd_render(args) -> int:
    cfg = _run_config(args)
    field = _load_field(args.field)
    img = render(field, RenderConfig(cfg.gamma, cfg.size, cfg.size))
    Path(args.out).write_bytes(write_pgm(img))
    return 0


def cmd_vectorize(args) -> int:
    cfg = _run_config(args)
    field = _load_field(args.field)
    try:
        result = vectorize(field)
    except NonManifoldBoundary as exc:
        dump = str(args.out) + ".dump.json"
        Path(dump).write_text(json.dumps({"error": str(exc), "dump": exc.dump}, indent=1, default=str))
        log.error("vectorization failed: %s (dump: %s)", exc, dump)
        return EXIT_VECTORIZE
    Path(args.out).write_text(write_svg(result.merged, cfg.size))
    if args.debug:
        layers = str(args.out)[: -len(".svg")] if str(args.out).endswith(".svg") else str(args.out)
        Path(layers + ".layers.svg").write_text(debug_svg(result, cfg.size))
    return 0


def cmd_interp(args) -> int:
    if not 0.0 <= args.lam <= 1.0:
        raise InputError("lambda must lie in [0, 1]")
    a, b = _load_field(args.field_a), _load_field(args.field_b)
    try:
        out = interpolate(a, b, args.lam)
    except GlyphFieldError as exc:
        raise InputError(str(exc)) from None
    Path(args.out).write_bytes(out.to_bytes())
    return 0


def cmd_compare(args) -> int:
    try:
        a, b = read_pgm(_read(args.a)), read_pgm(_read(args.b))
        print(compare(a, b).csv())
    except GlyphFieldError as exc:
        raise InputError(str(exc)) from None
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="glyphfield", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sdf-gen", help="SVG glyph -> .sdf grid, .sdc contour samples, .pgm target")
    p.add_argument("svg", type=Path)
    p.add_argument("out_prefix")
    _add_run_flags(p, ["grid", "gamma", "band", "mc", "seed"])
    p.set_defaults(func=cmd_sdf_gen)

    p = sub.add_parser("fit", help="fit a parabolic field to one or more sdf-gen outputs")
    p.add_argument("target_prefix", nargs="+")
    p.add_argument("out", help="output prefix (or directory when several targets are given)")
    _add_run_flags(
        p,
        ["np", "na", "gamma", "steps", "lr", "lr-final", "seed", "lambda-image", "lambda-grid",
         "lambda-contour", "lambda-regular", "lambda-ksq", "kmin-sq", "jobs"],
    )
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("render", help="rasterize a .pfd field to PGM")
    p.add_argument("field", type=Path)
    p.add_argument("out", type=Path)
    _add_run_flags(p, ["size", "gamma"])
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("vectorize", help="convert a .pfd field to an SVG outline")
    p.add_argument("field", type=Path)
    p.add_argument("out", type=Path)
    p.add_argument("--debug", action="store_true", help="also write per-primitive layers")
    _add_run_flags(p, ["size"])
    p.set_defaults(func=cmd_vectorize)

    p = sub.add_parser("interp", help="blend two fields' parameters")
    p.add_argument("field_a", type=Path)
    p.add_argument("field_b", type=Path)
    p.add_argument("lam", type=float, metavar="lambda")
    p.add_argument("out", type=Path)
    p.set_defaults(func=cmd_interp)

    p = sub.add_parser("compare", help="print l1,iou,psnr for two PGM images")
    p.add_argument("a", type=Path)
    p.add_argument("b", type=Path)
    p.set_defaults(func=cmd_compare)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"glyphfield: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
