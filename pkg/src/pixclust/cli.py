"""Command-line interface.

Subcommands: ``gen`` (seeded synthetic images), ``curve`` (one pipeline over
a g range), ``render`` (one approximation image), ``compare`` (every
reproducible curve in one CSV), ``verify`` (the invariant suite).

Exit codes: 0 success, 1 verification failure, 2 usage/config error,
3 I/O or format error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import pipelines
from .image import Image
from .imgio import PgmError, read_pgm, render_partition, write_curve_csv, write_pgm
from .segments import StoppingCondition
from .synth import KINDS, generate
from .verification import run_verification

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_IO = 3


def _parse_g_range(text: str) -> tuple[int, int]:
    """``a..b`` inclusive, or a single ``g``."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo_i, hi_i = int(lo), int(hi)
    else:
        lo_i = hi_i = int(text)
    if lo_i < 1 or hi_i < lo_i:
        raise ValueError(f"invalid g range {text!r}")
    return lo_i, hi_i


def _parse_size(text: str) -> tuple[int, int]:
    w, h = text.lower().split("x", 1)
    return int(w), int(h)


def _load_image(path: str) -> Image:
    return read_pgm(Path(path).read_bytes())


def _out_path(outdir: str | None, name: str) -> Path:
    base = Path(outdir) if outdir else Path(".")
    base.mkdir(parents=True, exist_ok=True)
    return base / name


def _stop_from(args) -> StoppingCondition:
    return StoppingCondition.parse(args.stop)


def cmd_gen(args) -> int:
    w, h = _parse_size(args.size)
    img = generate(args.kind, w, h, args.levels, args.seed)
    Path(args.output).write_bytes(write_pgm(img))
    print(args.output)
    return EXIT_OK


def cmd_curve(args) -> int:
    image = _load_image(args.input)
    g_lo, g_hi = _parse_g_range(args.g)
    stem = Path(args.input).stem
    records = pipelines.curve(image, args.pipeline, g_lo, g_hi, _stop_from(args))
    csv_path = _out_path(args.outdir, f"{stem}_{args.pipeline}.csv")
    csv_path.write_bytes(write_curve_csv(records))
    print(csv_path)
    if args.render:
        for rec in records:
            part = pipelines.partition_for(image, args.pipeline, rec.g, _stop_from(args))
            path = _out_path(args.outdir, f"{stem}_{args.pipeline}_g{rec.g}.pgm")
            path.write_bytes(write_pgm(render_partition(part, image)))
            print(path)
    return EXIT_OK


def cmd_render(args) -> int:
    image = _load_image(args.input)
    g_lo, g_hi = _parse_g_range(args.g)
    stem = Path(args.input).stem
    for g in range(g_lo, g_hi + 1):
        part = pipelines.partition_for(image, args.pipeline, g, _stop_from(args))
        path = _out_path(args.outdir, f"{stem}_{args.pipeline}_g{g}.pgm")
        path.write_bytes(write_pgm(render_partition(part, image)))
        print(path)
    return EXIT_OK


def cmd_compare(args) -> int:
    image = _load_image(args.input)
    g_lo, g_hi = _parse_g_range(args.g)
    stem = Path(args.input).stem
    records = pipelines.compare_curves(image, g_lo, g_hi)
    csv_path = _out_path(args.outdir, f"{stem}_compare.csv")
    csv_path.write_bytes(write_curve_csv(records))
    print(csv_path)
    for g in args.render_g or []:
        for pipeline in ("optimal", "split", "merge-all", "merge-adjacent", "reduce"):
            part = pipelines.partition_for(image, pipeline, g)
            path = _out_path(args.outdir, f"{stem}_{pipeline}_g{g}.pgm")
            path.write_bytes(write_pgm(render_partition(part, image)))
            print(path)
    return EXIT_OK


def cmd_verify(args) -> int:
    image = _load_image(args.input)
    results = run_verification(image, seed=args.seed, g_max=args.g_max, trials=args.trials)
    width = max(len(r.name) for r in results)
    hard_fail = False
    for r in results:
        print(f"{r.name:<{width}}  {r.status:<6}  {r.details}", file=sys.stderr)
        if r.hard and not r.passed:
            hard_fail = True
    print("verification " + ("FAILED" if hard_fail else "passed"), file=sys.stderr)
    return EXIT_VERIFY if hard_fail else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="pixclust",
        description="Hierarchical pixel clustering: piecewise-constant image "
        "approximations minimizing total squared error.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a seeded synthetic test image")
    p.add_argument("--kind", choices=KINDS, default="bimodal")
    p.add_argument("--size", default="64x64", help="WxH, e.g. 128x96")
    p.add_argument("--levels", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("output")
    p.set_defaults(func=cmd_gen)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--outdir", default=None, help="output directory (default: cwd)")
    common.add_argument(
        "--stop",
        default="one-segment",
        help="reduction stopping rule: one-segment | unique-means | target=M",
    )

    p = sub.add_parser("curve", parents=[common], help="one pipeline's sigma-vs-g curve")
    p.add_argument("--pipeline", choices=pipelines.PIPELINES, required=True)
    p.add_argument("--g", default="1..64", help="g range a..b (inclusive) or single g")
    p.add_argument("--render", action="store_true", help="also write one PGM per g")
    p.add_argument("input")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("render", parents=[common], help="g-cluster approximation image(s)")
    p.add_argument("--pipeline", choices=pipelines.PIPELINES, required=True)
    p.add_argument("--g", required=True)
    p.add_argument("input")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("compare", parents=[common], help="all curves in one CSV")
    p.add_argument("--g", default="1..256")
    p.add_argument(
        "--render-g",
        type=int,
        action="append",
        help="also render each pipeline at this g (repeatable)",
    )
    p.add_argument("input")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("verify", help="run the invariant suite on an image")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--g-max", type=int, default=64)
    p.add_argument("--trials", type=int, default=300)
    p.add_argument("input")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (PgmError, OSError) as exc:
        print(f"pixclust: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"pixclust: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
