"""Command-line front end.

Subcommands: warp, sweep, gen-pd, points, boxes, autocrowd, report.
Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from . import __version__
from .annotations import (
    PointSet,
    read_boxes_json,
    read_points_jsonl,
    transform_boxes,
    transform_points,
    write_boxes_json,
    write_points_jsonl,
)
from .autocrowd import compose_autocrowd, content_density_per_kpx, extract_head_patches
from .benchkit import load_predictions_jsonl, render_csv, render_text, report
from .datasetgen import generate_pd, load_image
from .mobius import CoordFrame, MobiusParams, MobiusPdError, identity_params, validate_params
from .presets import (
    AugmentPolicy,
    Orientation,
    SplitMix64,
    parse_policy,
    preset_params,
    sample_params,
)
from .warp import Background, Fit, Interpolation, WarpSpec, warp_image

USAGE_EXIT = 1
DATA_EXIT = 2

_RAW_PARAM_FLAGS = [f"--{p}-{c}" for p in "abcd" for c in ("re", "im")]


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is exit 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(USAGE_EXIT)


def _add_param_flags(sub: argparse.ArgumentParser, with_policy: bool = False) -> None:
    group = sub.add_argument_group(
        "transform parameters",
        "a named --preset, raw components, or a sampled --policy (mutually exclusive); "
        "unset raw components default to the identity map",
    )
    group.add_argument("--preset", choices=[o.value for o in Orientation],
                       help="named view orientation")
    group.add_argument("--intensity", type=float, default=0.3,
                       help="distortion intensity for --preset (default 0.3)")
    for letter in "abcd":
        for comp, word in (("re", "real"), ("im", "imaginary")):
            group.add_argument(f"--{letter}-{comp}", type=float, default=None,
                               help=f"{word} part of parameter {letter}")
    if with_policy:
        group.add_argument("--policy", type=Path, default=None,
                           help="key/value policy file; samples gated parameters")
        group.add_argument("--seed", type=int, default=None,
                           help="override the policy seed")


def _add_spec_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--background", choices=[b.value for b in Background],
                     default=Background.BLACK.value, help="background mode (default black)")
    sub.add_argument("--interpolation", choices=[i.value for i in Interpolation],
                     default=Interpolation.BILINEAR.value, help="resampling mode (default bilinear)")
    sub.add_argument("--fit", choices=[f.value for f in Fit], default=Fit.NONE.value,
                     help="canvas fit mode (default none)")


def _spec_from_args(args) -> WarpSpec:
    return WarpSpec(
        background=Background(args.background),
        interpolation=Interpolation(args.interpolation),
        fit=Fit(args.fit),
    )


def _raw_params_given(args) -> bool:
    return any(getattr(args, f"{p}_{c}") is not None for p in "abcd" for c in ("re", "im"))


def _params_from_args(parser: _Parser, args) -> MobiusParams:
    raw = _raw_params_given(args)
    policy = getattr(args, "policy", None)
    chosen = sum([args.preset is not None, raw, policy is not None])
    if chosen > 1:
        parser.error("--preset, raw --a-re/... parameters, and --policy are mutually exclusive")
    if chosen == 0:
        parser.error("one of --preset, raw parameters, or --policy is required")
    if args.preset is not None:
        return preset_params(Orientation(args.preset), args.intensity)
    if raw:
        def comp(name, default):
            re = getattr(args, f"{name}_re")
            im = getattr(args, f"{name}_im")
            if re is None and im is None:
                return default
            return complex(re if re is not None else 0.0, im if im is not None else 0.0)
        return validate_params(comp("a", 1 + 0j), comp("b", 0j), comp("c", 0j), comp("d", 1 + 0j))
    policy_obj = parse_policy(Path(policy).read_text())
    if args.seed is not None:
        policy_obj = AugmentPolicy(
            probability=policy_obj.probability, intensity_lo=policy_obj.intensity_lo,
            intensity_hi=policy_obj.intensity_hi, orientations=policy_obj.orientations,
            background=policy_obj.background, seed=args.seed,
        )
    apply, params = sample_params(policy_obj, policy_obj.rng())
    return params if apply else identity_params()


def _save_image(arr: np.ndarray, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(arr).save(path)


def build_parser() -> _Parser:
    parser = _Parser(prog="mobiuspd",
                     description="Perspective-distortion synthesis with Möbius warps")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p_warp = subs.add_parser("warp", help="warp a single image")
    _add_param_flags(p_warp, with_policy=True)
    _add_spec_flags(p_warp)
    p_warp.add_argument("input", type=Path, help="input image (PNG or JPEG)")
    p_warp.add_argument("output", type=Path, help="output image (PNG or JPEG)")

    p_sweep = subs.add_parser("sweep", help="intensity series for one preset")
    p_sweep.add_argument("--preset", required=True, choices=[o.value for o in Orientation])
    p_sweep.add_argument("--from", dest="lo", type=float, required=True, help="first intensity")
    p_sweep.add_argument("--to", dest="hi", type=float, required=True, help="last intensity")
    p_sweep.add_argument("--steps", type=int, required=True, help="number of images")
    _add_spec_flags(p_sweep)
    p_sweep.add_argument("input", type=Path, help="input image")
    p_sweep.add_argument("outdir", type=Path, help="directory for the series")

    p_gen = subs.add_parser("gen-pd", help="generate the eight benchmark subsets")
    p_gen.add_argument("--in", dest="input_dir", type=Path, required=True, help="input image tree")
    p_gen.add_argument("--out", dest="output_dir", type=Path, required=True, help="output root")
    p_gen.add_argument("--intensity", type=float, default=0.3, help="fixed intensity (default 0.3)")
    p_gen.add_argument("--seed", type=int, default=0, help="global seed recorded in the manifest")
    p_gen.add_argument("--threads", type=int, default=1, help="parallel image workers")

    p_pts = subs.add_parser("points", help="transform point annotations (JSON-lines)")
    _add_param_flags(p_pts)
    _add_spec_flags(p_pts)
    p_pts.add_argument("--width", type=int, required=True, help="canvas width in pixels")
    p_pts.add_argument("--height", type=int, required=True, help="canvas height in pixels")
    p_pts.add_argument("input", type=Path, help="input .jsonl ({image, points} per line)")
    p_pts.add_argument("output", type=Path, help="output .jsonl")

    p_box = subs.add_parser("boxes", help="transform bounding boxes (COCO-like JSON)")
    _add_param_flags(p_box)
    _add_spec_flags(p_box)
    p_box.add_argument("--samples-per-edge", type=int, default=8,
                       help="edge samples for the hull (default 8)")
    p_box.add_argument("--min-area", type=float, default=1.0,
                       help="minimum clipped area in px^2 (default 1)")
    p_box.add_argument("input", type=Path, help="input COCO-like JSON")
    p_box.add_argument("output", type=Path, help="output JSON")

    p_ac = subs.add_parser("autocrowd", help="warp a scene and composite crowd into the background")
    _add_param_flags(p_ac)
    p_ac.add_argument("--interpolation", choices=[i.value for i in Interpolation],
                      default=Interpolation.BILINEAR.value)
    p_ac.add_argument("--points", type=Path, required=True, help="input points .jsonl")
    p_ac.add_argument("--out-points", type=Path, required=True, help="output points .jsonl")
    p_ac.add_argument("--density", type=float, default=None,
                      help="target added heads per kilo-pixel of background "
                           "(default: the scene's own annotated density)")
    p_ac.add_argument("--seed", type=int, default=0, help="placement seed")
    p_ac.add_argument("--k-neighbors", type=int, default=3, help="neighbors for patch sizing")
    p_ac.add_argument("input", type=Path, help="input scene image")
    p_ac.add_argument("output", type=Path, help="output composited image")

    p_rep = subs.add_parser("report", help="robustness report from prediction files")
    p_rep.add_argument("--baseline", type=Path, required=True, help="baseline predictions .jsonl")
    p_rep.add_argument("--subset", action="append", default=[], metavar="NAME=PATH",
                       help="subset predictions, repeatable (e.g. PD-L=preds.jsonl)")
    p_rep.add_argument("--csv", type=Path, default=None, help="also write CSV here")
    p_rep.add_argument("--text", type=Path, default=None, help="also write the text table here")

    return parser


def _cmd_warp(parser, args) -> int:
    params = _params_from_args(parser, args)
    img = load_image(args.input)
    warped = warp_image(img, params, _spec_from_args(args))
    _save_image(warped.image, args.output)
    return 0


def _cmd_sweep(parser, args) -> int:
    if args.steps < 1:
        parser.error("--steps must be >= 1")
    img = load_image(args.input)
    spec = _spec_from_args(args)
    args.outdir.mkdir(parents=True, exist_ok=True)
    for i in range(args.steps):
        t = i / (args.steps - 1) if args.steps > 1 else 0.0
        intensity = args.lo + (args.hi - args.lo) * t
        params = preset_params(Orientation(args.preset), intensity)
        warped = warp_image(img, params, spec)
        _save_image(warped.image, args.outdir / f"{args.preset}_{intensity:.2f}.png")
    return 0


def _cmd_gen_pd(parser, args) -> int:
    manifest = generate_pd(args.input_dir, args.output_dir, intensity=args.intensity,
                           seed=args.seed, threads=args.threads)
    print(f"wrote {len(manifest.items)} images across {len(set(r.subset for r in manifest.items))} "
          f"subsets to {args.output_dir} ({len(manifest.failures)} decode failures)")
    return 0


def _cmd_points(parser, args) -> int:
    params = _params_from_args(parser, args)
    spec = _spec_from_args(args)
    frame = CoordFrame(args.width, args.height)
    records = read_points_jsonl(args.input, frame)
    out = []
    for image, pts in records:
        kept, dropped = transform_points(pts, params, spec)
        out.append((image, kept, {"dropped": dropped}))
    write_points_jsonl(args.output, out)
    return 0


def _cmd_boxes(parser, args) -> int:
    params = _params_from_args(parser, args)
    spec = _spec_from_args(args)
    doc, by_image = read_boxes_json(args.input)
    transformed = {}
    dropped = {}
    for image_id, (_, bx) in by_image.items():
        kept, n_dropped = transform_boxes(bx, params, spec,
                                          samples_per_edge=args.samples_per_edge,
                                          min_area_px=args.min_area)
        transformed[image_id] = kept
        dropped[image_id] = n_dropped
    write_boxes_json(args.output, doc, transformed, dropped)
    return 0


def _cmd_autocrowd(parser, args) -> int:
    params = _params_from_args(parser, args)
    img = load_image(args.input)
    frame = CoordFrame(img.shape[1], img.shape[0])
    records = read_points_jsonl(args.points, frame)
    if len(records) != 1:
        raise MobiusPdError("autocrowd expects exactly one point record matching the input image")
    _, pts = records[0]
    spec = WarpSpec(background=Background.BLACK, interpolation=Interpolation(args.interpolation))
    warped = warp_image(img, params, spec)
    kept, _ = transform_points(pts, params, spec)
    patches = extract_head_patches(img, pts, k_neighbors=args.k_neighbors)
    density = args.density
    if density is None:
        density = content_density_per_kpx(pts, int(warped.mask.sum()))
    composed, added = compose_autocrowd(warped, patches, density, SplitMix64(args.seed))
    _save_image(composed, args.output)
    all_points = PointSet(np.concatenate([kept.points, added.points], axis=0), frame)
    flags = [False] * len(kept) + [True] * len(added)
    write_points_jsonl(args.out_points, [(str(args.output), all_points, {"augmented": flags})])
    print(f"composited {len(added)} crowd patches "
          f"({len(kept)} original labels kept)")
    return 0


def _cmd_report(parser, args) -> int:
    baseline = load_predictions_jsonl(args.baseline)
    subsets = {}
    for item in args.subset:
        if "=" not in item:
            parser.error(f"--subset expects NAME=PATH, got {item!r}")
        name, _, path = item.partition("=")
        subsets[name] = load_predictions_jsonl(path)
    rep = report(baseline, subsets)
    text = render_text(rep)
    sys.stdout.write(text)
    if args.text is not None:
        args.text.write_text(text)
    if args.csv is not None:
        args.csv.write_text(render_csv(rep))
    return 0


_COMMANDS = {
    "warp": _cmd_warp,
    "sweep": _cmd_sweep,
    "gen-pd": _cmd_gen_pd,
    "points": _cmd_points,
    "boxes": _cmd_boxes,
    "autocrowd": _cmd_autocrowd,
    "report": _cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](parser, args)
    except SystemExit:
        raise
    except (MobiusPdError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"mobiuspd {args.command}: {exc}\n")
        return DATA_EXIT


if __name__ == "__main__":
    sys.exit(main())
