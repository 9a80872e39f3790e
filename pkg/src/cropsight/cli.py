"""Command-line pipeline: NDVI, composites, differencing, classification,
tiling, dataset manifests, evaluation, and synthetic scenes.

Exit codes: 0 success, 1 usage error, 2 data error (bad or missing files,
violated invariants). Data errors print a single diagnostic line to stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .bands import BandAssignment, compose, compute_ndvi, temporal_difference
from .config import CONFIG_ENV_VAR, PipelineConfig, resolve_config
from .dataset import (
    ROLES,
    SplitPolicy,
    build_manifest,
    read_manifest,
    split_summary,
    write_manifest,
)
from .errors import ConfigError, CropsightError
from .geotiff import read_geotiff, write_geotiff
from .groundtruth import as_class_mask, render_mask, threshold_classify, write_classmap
from .metrics import (
    evaluate_manifest,
    format_report_table,
    report_from_pairs,
    report_to_dict,
    write_report_csv,
)
from .raster import read_tiles, merge_tiles, tile_raster, write_tiles
from .synth import generate_scene, load_scene_spec


class UsageError(Exception):
    """Bad flags or arguments; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _parse_ints(text: str, count: int, what: str) -> tuple[int, ...]:
    parts = text.split(",")
    if len(parts) != count:
        raise UsageError(f"{what} needs {count} comma-separated integers, got {text!r}")
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise UsageError(f"{what} needs integers, got {text!r}") from None


def _parse_floats(text: str, count: int, what: str) -> tuple[float, ...]:
    parts = text.split(",")
    if len(parts) != count:
        raise UsageError(f"{what} needs {count} comma-separated numbers, got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise UsageError(f"{what} needs numbers, got {text!r}") from None


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    """Resolve defaults < config file < command-line flags."""
    overrides = {}
    for key in ("threshold", "tile_size", "classmap", "threads"):
        if hasattr(args, key):
            overrides[key] = getattr(args, key)
    if getattr(args, "window", None) is not None:
        overrides["window"] = _parse_floats(args.window, 2, "--window")
    try:
        cfg = resolve_config(getattr(args, "config", None), overrides)
        if getattr(args, "bands", None) is not None:
            nir, red, green, blue = _parse_ints(args.bands, 4, "--bands")
            cfg = dataclasses.replace(
                cfg,
                bands=BandAssignment(nir, red, green, blue, cfg.bands.reflectance_scale),
            )
        if getattr(args, "scale", None) is not None:
            cfg = dataclasses.replace(
                cfg, bands=dataclasses.replace(cfg.bands, reflectance_scale=args.scale)
            )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def _emit_reports(args: argparse.Namespace, reports) -> None:
    if getattr(args, "csv", None):
        write_report_csv(reports, args.csv)
    if getattr(args, "json", False):
        print(json.dumps([report_to_dict(r) for r in reports], indent=2))
    else:
        print(format_report_table(reports))


# ---------------------------------------------------------------------------
# Subcommand handlers. Each returns the process exit code.
# ---------------------------------------------------------------------------


def cmd_ndvi(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    raster = read_geotiff(args.input)
    write_geotiff(compute_ndvi(raster, cfg.bands), args.output)
    print(f"wrote {args.output}")
    return 0


def cmd_compose(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    raster = read_geotiff(args.input)
    write_geotiff(compose(raster, args.kind, cfg.bands, cfg.window), args.output)
    print(f"wrote {args.output}")
    return 0


def cmd_diff(args: argparse.Namespace) -> int:
    before = read_geotiff(args.before)
    after = read_geotiff(args.after)
    write_geotiff(temporal_difference(before, after), args.output)
    print(f"wrote {args.output}")
    return 0


def cmd_groundtruth(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    diff = read_geotiff(args.input)
    write_geotiff(threshold_classify(diff, cfg.threshold), args.output)
    print(f"wrote {args.output}")
    return 0


def cmd_render(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    mask = read_geotiff(args.input)
    write_geotiff(render_mask(mask, cfg.classes()), args.output)
    print(f"wrote {args.output}")
    return 0


def cmd_tile(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    raster = read_geotiff(args.input)
    stem = args.stem or Path(args.input).stem
    tileset = tile_raster(raster, cfg.tile_size)
    write_tiles(tileset, args.outdir, stem)
    padded_w = tileset.grid_cols * tileset.tile_size
    padded_h = tileset.grid_rows * tileset.tile_size
    note = ""
    if (padded_w, padded_h) != (raster.width, raster.height):
        note = f"; padded {raster.width}x{raster.height} to {padded_w}x{padded_h}"
    print(
        f"wrote {tileset.count} tiles ({tileset.grid_rows} rows x {tileset.grid_cols} cols "
        f"of {tileset.tile_size}) to {args.outdir}{note}"
    )
    return 0


def cmd_merge(args: argparse.Namespace) -> int:
    size = None
    if args.crop is not None:
        text = args.crop.lower().replace("x", ",")
        size = _parse_ints(text, 2, "--crop")
    tileset = read_tiles(args.indir, args.stem)
    crop = False
    if size is not None:
        tileset = dataclasses.replace(tileset, source_width=size[0], source_height=size[1])
        crop = True
    merged = merge_tiles(tileset, crop_to_source=crop)
    write_geotiff(merged, args.output)
    print(f"merged {tileset.count} tiles into {merged.width}x{merged.height} {args.output}")
    return 0


def cmd_manifest(args: argparse.Namespace) -> int:
    with open(args.layout, encoding="utf-8") as fh:
        try:
            layout = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.layout}: invalid JSON: {exc}") from None
    for key in ("inputs", "masks", "policy"):
        if key not in layout:
            raise ConfigError(f"{args.layout}: missing required key {key!r}")
    policy = SplitPolicy(layout["policy"])
    policy.check_complete()
    entries = build_manifest(
        layout["inputs"], layout["masks"], policy, verify_georeference=not args.no_verify
    )
    write_manifest(entries, args.output)
    summary = split_summary(entries)
    if args.json:
        print(json.dumps(summary, indent=2))
    else:
        print(f"total {summary['total']}")
        for role in ROLES:
            info = summary["roles"].get(role)
            if info and info["count"]:
                print(f"{role:<12}{info['count']:>8}  {info['percent']:.2f}%")
    print(f"wrote {args.output}")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    classes = cfg.classes()
    if len(args.paths) == 2:
        if args.pred_dir is not None:
            raise UsageError("--pred-dir only applies when evaluating a manifest")
        gt, _ = as_class_mask(read_geotiff(args.paths[0]), classes)
        pred, _ = as_class_mask(read_geotiff(args.paths[1]), classes)
        reports = report_from_pairs(
            [(gt, pred, "overall")], classes, group_by="overall", input_type=args.input_type
        )
    elif len(args.paths) == 1:
        if args.pred_dir is None:
            raise UsageError("evaluating a manifest requires --pred-dir")
        entries = read_manifest(args.paths[0])
        reports = evaluate_manifest(
            entries,
            args.pred_dir,
            classes,
            role=args.role,
            group_by=args.group_by,
            input_type=args.input_type,
            threads=cfg.threads,
        )
    else:
        raise UsageError("evaluate takes a ground-truth/prediction pair or one manifest")
    _emit_reports(args, reports)
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    spec = load_scene_spec(args.spec)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    before, after, expected = generate_scene(spec, cfg.threshold)
    classes = cfg.classes()
    write_geotiff(before, outdir / "before.tif")
    write_geotiff(after, outdir / "after.tif")
    write_geotiff(expected, outdir / "expected_mask.tif")
    write_geotiff(render_mask(expected, classes), outdir / "expected_rendered.tif")
    write_classmap(classes, outdir / "classmap.csv")
    print(
        f"wrote {spec.width}x{spec.height} scene ({len(spec.loss_regions)} loss regions, "
        f"seed {spec.seed}) to {outdir}"
    )
    return 0


# ---------------------------------------------------------------------------
# Parser wiring.
# ---------------------------------------------------------------------------


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="cropsight",
        description="Crop-loss mapping pipeline for two-date Sentinel-2 rasters.",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    common = _Parser(add_help=False)
    common.add_argument(
        "--config",
        metavar="PATH",
        default=None,
        help=f"JSON config file (also read from ${CONFIG_ENV_VAR})",
    )

    band_flags = _Parser(add_help=False)
    band_flags.add_argument(
        "--bands",
        metavar="NIR,RED,GREEN,BLUE",
        default=None,
        help="zero-based band indices in the input stack (default 3,2,1,0)",
    )
    band_flags.add_argument(
        "--scale", type=float, default=None, metavar="S",
        help="digital-number scale, reflectance = DN / S (default 10000)",
    )

    p = sub.add_parser(
        "ndvi", parents=[common, band_flags],
        help="compute an NDVI plane from a multiband scene",
    )
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(func=cmd_ndvi)

    p = sub.add_parser(
        "compose", parents=[common, band_flags],
        help="render an 8-bit RGB or false-color composite",
    )
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--kind", choices=("rgb", "fci"), required=True)
    p.add_argument(
        "--window", metavar="LO,HI", default=None,
        help="reflectance window mapped onto 0..255 (default 0.0,0.3)",
    )
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser(
        "diff", parents=[common],
        help="before-minus-after temporal difference (loss positive)",
    )
    p.add_argument("before")
    p.add_argument("after")
    p.add_argument("output")
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser(
        "groundtruth", parents=[common],
        help="threshold an NDVI difference into a 3-class mask",
    )
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument(
        "--threshold", type=float, default=None, metavar="T",
        help="NDVI drop at or above T marks loss (default 0.33)",
    )
    p.set_defaults(func=cmd_groundtruth)

    p = sub.add_parser(
        "render", parents=[common],
        help="paint a class mask with its class colors",
    )
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--classmap", metavar="CSV", default=None)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser(
        "tile", parents=[common],
        help="pad a raster and split it into square tiles",
    )
    p.add_argument("input")
    p.add_argument("outdir")
    p.add_argument("--size", dest="tile_size", type=int, default=None, metavar="N")
    p.add_argument("--stem", default=None, help="output name prefix (default: input stem)")
    p.set_defaults(func=cmd_tile)

    p = sub.add_parser(
        "merge", parents=[common],
        help="reassemble tiles into a single raster",
    )
    p.add_argument("indir")
    p.add_argument("output")
    p.add_argument("--stem", default=None, help="tile name prefix to select")
    p.add_argument(
        "--crop", metavar="WxH", default=None,
        help="crop the merged raster back to the original size",
    )
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser(
        "manifest", parents=[common],
        help="pair input and mask tiles into a dataset manifest",
    )
    p.add_argument("layout", help='JSON file: {"inputs": DIR, "masks": DIR, "policy": {district: role}}')
    p.add_argument("output", help="manifest CSV to write")
    p.add_argument("--no-verify", action="store_true", help="skip per-pair georeference checks")
    p.add_argument("--json", action="store_true", help="print the split summary as JSON")
    p.set_defaults(func=cmd_manifest)

    p = sub.add_parser(
        "evaluate", parents=[common],
        help="score predictions against ground truth",
    )
    p.add_argument(
        "paths", nargs="+", metavar="PATH",
        help="either GT_RASTER PRED_RASTER or a manifest CSV",
    )
    p.add_argument("--pred-dir", default=None, help="directory of prediction tiles (manifest mode)")
    p.add_argument("--role", default="test", choices=ROLES + ("all",))
    p.add_argument("--group-by", default="overall", choices=("overall", "year"))
    p.add_argument("--input-type", default="", metavar="NAME", help="label for the report rows")
    p.add_argument("--classmap", metavar="CSV", default=None)
    p.add_argument("--csv", metavar="PATH", default=None, help="also write the report as CSV")
    p.add_argument("--json", action="store_true", help="print full-precision JSON instead of a table")
    p.add_argument("--threads", type=int, default=None, metavar="N")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser(
        "synth", parents=[common],
        help="generate a synthetic before/after scene with known ground truth",
    )
    p.add_argument("spec", help="scene spec JSON")
    p.add_argument("outdir")
    p.add_argument("--threshold", type=float, default=None, metavar="T")
    p.add_argument("--classmap", metavar="CSV", default=None)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "func", None) is None:
            parser.print_usage(sys.stderr)
            print("cropsight: error: a subcommand is required", file=sys.stderr)
            return 1
        return args.func(args)
    except UsageError as exc:
        print(f"cropsight: error: {exc}", file=sys.stderr)
        return 1
    except (CropsightError, FileNotFoundError, OSError) as exc:
        print(f"cropsight: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
