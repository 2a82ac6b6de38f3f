"""Command line front end: ``mononav <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import floorseg, imgcore, ipm, pipeline, slic
from .errors import MononavError, SeedNotFloor, StageError
from .features import SafeZone
from .preprocess import build_kernel, smooth


def _add_segment_flags(p):
    p.add_argument("--k", type=int, help="desired superpixel count (default 200)")
    p.add_argument("--m", type=float, help="compactness weight (default 10)")
    p.add_argument("--iterations", type=int, help="SLIC iterations (default 10)")
    p.add_argument("--colorspace", choices=slic.COLOR_SPACES, help="working color space (default lab)")
    p.add_argument("--sigma", type=float, help="Gaussian smoothing sigma (default 5)")
    p.add_argument("--smooth-rgb-first", action="store_true", default=None, help="blur in RGB before Lab conversion")


def _add_detect_flags(p):
    _add_segment_flags(p)
    p.add_argument("--safe-zone", help="JSON file with safe zone vertices")
    p.add_argument("--ssd-multiplier", type=float, help="threshold slack over the training maximum (default 1.0)")
    p.add_argument("--no-normalize", action="store_true", default=None, help="use the raw, unscaled SSD")
    p.add_argument("--canny-low", type=float)
    p.add_argument("--canny-high", type=float)
    p.add_argument("--hough-votes", type=int)
    p.add_argument("--hough-minlen", type=float)
    p.add_argument("--hough-maxgap", type=float)
    p.add_argument("--hough-seed", type=int)
    p.add_argument("--hough-on-edges", action="store_true", default=None, help="run Hough on raw edges, not contours")
    p.add_argument("--vertical-tol", type=float)
    p.add_argument("--junction-radius", type=float)
    p.add_argument("--no-junctions", action="store_true", help="skip floor-junction masking")
    p.add_argument("--calibration", help="calibration JSON; also writes lut.csv/lut.bin")
    p.add_argument("--debug-artifacts", action="store_true", default=None)


_FLAG_KEYS = {
    "k": "k",
    "m": "m",
    "iterations": "iterations",
    "colorspace": "colorspace",
    "sigma": "sigma",
    "smooth_rgb_first": "smooth_rgb_first",
    "ssd_multiplier": "ssd_multiplier",
    "no_normalize": "no_normalize",
    "canny_low": "canny_low",
    "canny_high": "canny_high",
    "hough_votes": "hough_votes",
    "hough_minlen": "hough_minlen",
    "hough_maxgap": "hough_maxgap",
    "hough_seed": "hough_seed",
    "hough_on_edges": "hough_on_edges",
    "vertical_tol": "vertical_tol",
    "junction_radius": "junction_radius",
    "calibration": "calibration",
    "debug_artifacts": "debug_artifacts",
}


def _config_from_args(args) -> pipeline.PipelineConfig:
    overrides = {}
    for attr, key in _FLAG_KEYS.items():
        val = getattr(args, attr, None)
        if val is not None:
            overrides[key] = val
    if getattr(args, "safe_zone", None):
        overrides["safe_zone"] = json.loads(Path(args.safe_zone).read_text())
    if getattr(args, "no_junctions", False):
        overrides["use_junctions"] = False
    overrides["out_dir"] = args.out
    if args.config:
        return pipeline.PipelineConfig.load(args.config, overrides)
    return pipeline.PipelineConfig.from_dict(overrides)


def _labels_u16(labels: slic.SegmentLabels) -> np.ndarray:
    if labels.segment_count > 65535:
        raise MononavError("too many segments for a 16-bit label map")
    return labels.labels.astype(np.uint16)


def cmd_detect(args) -> int:
    cfg = _config_from_args(args)
    img = imgcore.load_image(args.image)
    out = Path(args.out)
    try:
        res = pipeline.run_pipeline(img, cfg)
    except StageError as err:
        if isinstance(err.cause, SeedNotFloor):
            p = err.partial
            overlay = pipeline.diagnostic_overlay(p["image"], p.get("labels"), p.get("zone"), p.get("seed"))
            imgcore.save_image(overlay, out / "overlay.png")
            print(f"error: {err}; diagnostic overlay written to {out / 'overlay.png'}", file=sys.stderr)
            return 1
        raise
    imgcore.save_mask(res.occupancy, out / "occupancy.pgm")
    imgcore.save_gray(_labels_u16(res.labels), out / "labels.pgm")
    imgcore.save_image(pipeline.diagnostic_overlay(img, res.labels, res.zone, res.seed), out / "overlay.png")
    res.histogram.to_csv(out / "histogram.csv")
    pipeline.write_features_csv(out / "features.csv", res)
    timings = dict(res.timings)
    timings["total"] = res.total_time
    (out / "timings.json").write_text(json.dumps(timings, indent=2))
    if cfg.debug_artifacts:
        imgcore.save_mask(res.region, out / "region.pgm")
        imgcore.save_mask(res.junction_mask, out / "junction_mask.pgm")
        if res.edges is not None:
            imgcore.save_mask(np.where(res.edges, 255, 0).astype(np.uint8), out / "edges.png")
            from .junctions import draw_lines

            imgcore.save_image(draw_lines(img, res.lines), out / "lines.png")
    if cfg.calibration:
        _write_lut(ipm.Calibration.load(cfg.calibration).homography(), (0, 0, img.shape[1], img.shape[0]), out)
    white = int((res.occupancy == 255).sum())
    print(f"segments={res.labels.segment_count} traversable_px={white} total_s={res.total_time:.3f}")
    return 0


def cmd_segment(args) -> int:
    cfg = _config_from_args(args)
    img = imgcore.load_image(args.image)
    kernel = build_kernel(cfg.sigma)
    if cfg.slic.color_space == "lab":
        if cfg.smooth_rgb_first:
            work = imgcore.rgb_to_lab(np.clip(np.floor(smooth(img, kernel) + 0.5), 0, 255).astype(np.uint8))
        else:
            work = smooth(imgcore.rgb_to_lab(img), kernel)
    else:
        work = smooth(img, kernel)
    labels = slic.segment(work, cfg.slic)
    out = Path(args.out)
    imgcore.save_gray(_labels_u16(labels), out / "labels.pgm")
    imgcore.save_image(slic.boundary_overlay(img, labels), out / "overlay.png")
    print(f"segments={labels.segment_count}")
    return 0


def cmd_floodfill(args) -> int:
    img = imgcore.load_image(args.image)
    h, w = img.shape[:2]
    if args.seed:
        node = tuple(args.seed)
    else:
        cx, cy = SafeZone.default(w, h).centroid
        node = (int(round(cx)), int(round(cy)))
    mask = floorseg.flood_fill_mask(img, node, args.tolerance)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    imgcore.save_mask(mask, out / "floodfill.pgm")
    print(f"seed={node} filled_px={int((mask == 255).sum())}")
    return 0


def _print_matrix(h: ipm.Homography) -> None:
    for row in h.h:
        print(" ".join(f"{v: .10e}" for v in row))


def cmd_calibrate(args) -> int:
    cal = ipm.Calibration.load(args.calibration)
    h = cal.homography()
    _print_matrix(h)
    print(f"reprojection_error_calibration={ipm.reprojection_error(h, cal.correspondences):.6e}")
    if cal.test_points:
        print(f"reprojection_error_test={ipm.reprojection_error(h, cal.test_points):.6e}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "homography.json").write_text(json.dumps({"h": h.h.tolist()}, indent=2))
    return 0


def _parse_points(values):
    pts = []
    for v in values:
        x, y = v.split(",")
        pts.append((float(x), float(y)))
    return pts


def cmd_warp(args) -> int:
    img = imgcore.load_image(args.image)
    roi = _parse_points(args.roi)
    if len(roi) != 4:
        raise MononavError("--roi needs exactly four x,y points (TL TR BR BL)")
    warped, h = ipm.warp_topdown(img, roi, args.width, args.height)
    Path(args.output).parent.mkdir(parents=True, exist_ok=True)
    imgcore.save_image(warped, args.output)
    _print_matrix(h)
    return 0


def _write_lut(h, roi, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    lut = ipm.build_lookup_table(h, roi)
    lut.to_csv(out / "lut.csv")
    lut.save_binary(out / "lut.bin")


def cmd_lut(args) -> int:
    h = ipm.Calibration.load(args.calibration).homography()
    _write_lut(h, tuple(args.roi), Path(args.out))
    print(f"wrote {Path(args.out) / 'lut.csv'} and {Path(args.out) / 'lut.bin'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mononav", description="Monocular floor / obstacle detection.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="run the full obstacle-detection pipeline")
    p.add_argument("image")
    p.add_argument("--config", help="JSON config; command line flags override it")
    p.add_argument("--out", default="out", help="output directory")
    _add_detect_flags(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("segment", help="SLIC superpixels and boundary overlay only")
    p.add_argument("image")
    p.add_argument("--config")
    p.add_argument("--out", default="out")
    _add_segment_flags(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("floodfill", help="pixel flood-fill floor baseline")
    p.add_argument("image")
    p.add_argument("--seed", type=int, nargs=2, metavar=("X", "Y"), help="default: safe zone centroid")
    p.add_argument("--tolerance", type=int, default=0, help="per-channel color tolerance")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_floodfill)

    p = sub.add_parser("calibrate", help="estimate the ground homography from a calibration JSON")
    p.add_argument("calibration")
    p.add_argument("--out", help="directory for homography.json")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("warp", help="top-down view of a quadrilateral region")
    p.add_argument("image")
    p.add_argument("--roi", nargs=4, required=True, metavar="X,Y", help="TL TR BR BL corners")
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--output", default="out/topdown.png")
    p.set_defaults(func=cmd_warp)

    p = sub.add_parser("lut", help="export the pixel -> ground lookup table")
    p.add_argument("calibration")
    p.add_argument("--roi", type=int, nargs=4, required=True, metavar=("X0", "Y0", "W", "H"))
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_lut)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: FileNotFound: {exc}", file=sys.stderr)
        return 1
    except (MononavError, ValueError, KeyError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
