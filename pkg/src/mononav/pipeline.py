"""End-to-end obstacle detection: image in, occupancy mask out."""

from __future__ import annotations

import dataclasses
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import features as feat
from . import floorseg, junctions, slic
from .errors import StageError
from .imgcore import check_rgb, rgb_to_lab
from .preprocess import DEFAULT_SIGMA, build_kernel, smooth

STAGES = (
    "rgb_to_lab",
    "smooth",
    "segment",
    "features",
    "safe_zone",
    "train",
    "region_grow",
    "junctions",
    "mask",
)

# junction detection runs on the camera image smoothed at this scale; the much
# stronger segmentation blur would flatten gradients below the Canny thresholds
JUNCTION_SIGMA = 1.4


@dataclass
class PipelineConfig:
    slic: slic.SlicParams = field(default_factory=slic.SlicParams)
    sigma: float = DEFAULT_SIGMA
    smooth_rgb_first: bool = False
    # SafeZone, {"vertices": ..., "relative": ...}, or None for the default trapezoid
    safe_zone: object = None
    ssd_multiplier: float = 1.0
    normalize: bool = True
    junctions: junctions.JunctionParams = field(default_factory=junctions.JunctionParams)
    junction_sigma: float = JUNCTION_SIGMA
    use_junctions: bool = True
    calibration: str | None = None
    out_dir: str | None = None
    debug_artifacts: bool = False

    def __post_init__(self):
        build_kernel(self.sigma)
        if self.ssd_multiplier < 1:
            raise ValueError("ssd_multiplier must be >= 1")
        if self.out_dir is not None:
            os.makedirs(self.out_dir, exist_ok=True)
            if not os.access(self.out_dir, os.W_OK):
                raise PermissionError(f"output directory {self.out_dir} is not writable")

    def zone_for(self, width: int, height: int) -> feat.SafeZone:
        if self.safe_zone is None:
            zone = feat.SafeZone.default(width, height)
        elif isinstance(self.safe_zone, feat.SafeZone):
            zone = self.safe_zone
        else:
            zone = feat.SafeZone.from_config(self.safe_zone, width, height)
        zone.validate(width, height)
        return zone

    # flat key -> (section, attribute); section None means PipelineConfig itself
    _KEYS = {
        "k": ("slic", "k"),
        "m": ("slic", "m"),
        "iterations": ("slic", "iterations"),
        "colorspace": ("slic", "color_space"),
        "canny_low": ("junctions", "canny_low"),
        "canny_high": ("junctions", "canny_high"),
        "hough_votes": ("junctions", "votes"),
        "hough_minlen": ("junctions", "min_len"),
        "hough_maxgap": ("junctions", "max_gap"),
        "vertical_tol": ("junctions", "vertical_tol"),
        "junction_radius": ("junctions", "radius"),
        "hough_seed": ("junctions", "seed"),
        "hough_on_edges": ("junctions", "hough_on_edges"),
        "sigma": (None, "sigma"),
        "smooth_rgb_first": (None, "smooth_rgb_first"),
        "safe_zone": (None, "safe_zone"),
        "ssd_multiplier": (None, "ssd_multiplier"),
        "normalize": (None, "normalize"),
        "junction_sigma": (None, "junction_sigma"),
        "use_junctions": (None, "use_junctions"),
        "calibration": (None, "calibration"),
        "out_dir": (None, "out_dir"),
        "debug_artifacts": (None, "debug_artifacts"),
    }

    @classmethod
    def from_dict(cls, values: dict, base: "PipelineConfig | None" = None) -> "PipelineConfig":
        """Apply flat keys (as in the JSON config file) on top of ``base``."""
        top = {} if base is None else {f.name: getattr(base, f.name) for f in dataclasses.fields(cls)}
        slic_kw = dataclasses.asdict(top.get("slic", slic.SlicParams()))
        junc_kw = dataclasses.asdict(top.get("junctions", junctions.JunctionParams()))
        for key, val in values.items():
            if key == "no_normalize":
                key, val = "normalize", not val
            if key not in cls._KEYS:
                raise KeyError(f"unknown configuration key {key!r}")
            section, attr = cls._KEYS[key]
            {"slic": slic_kw, "junctions": junc_kw, None: top}[section][attr] = val
        top["slic"] = slic.SlicParams(**slic_kw)
        top["junctions"] = junctions.JunctionParams(**junc_kw)
        return cls(**top)

    @classmethod
    def load(cls, path, overrides: dict | None = None) -> "PipelineConfig":
        values = json.loads(Path(path).read_text())
        cfg = cls.from_dict(values)
        return cls.from_dict(overrides or {}, base=cfg)


@dataclass
class PipelineResult:
    occupancy: np.ndarray
    labels: slic.SegmentLabels
    features: list
    histogram: feat.ColorHistogram
    timings: dict
    region: np.ndarray = None  # occupancy before junction masking
    junction_mask: np.ndarray = None
    model: floorseg.FloorModel = None
    scores: dict = None
    classes: dict = None
    training_ids: set = None
    zone: feat.SafeZone = None
    seed: floorseg.Seed = None
    edges: np.ndarray = None
    lines: list = None
    floor_junctions: list = None
    total_time: float = 0.0


class _Timer:
    def __init__(self, partial: dict):
        self.timings = {}
        self.partial = partial

    def run(self, stage, fn, *args, **kwargs):
        t0 = time.perf_counter()
        try:
            out = fn(*args, **kwargs)
        except Exception as exc:
            err = StageError(stage, exc)
            err.partial = self.partial
            raise err from exc
        self.timings[stage] = time.perf_counter() - t0
        return out


def run_pipeline(image, config: PipelineConfig | None = None) -> PipelineResult:
    """Segment, classify and mask one RGB frame.

    Stage errors are re-raised as :class:`StageError` carrying the stage name;
    ``err.partial`` holds whatever intermediate results exist at that point.
    """
    cfg = config or PipelineConfig()
    t_start = time.perf_counter()
    img = check_rgb(image)
    h, w = img.shape[:2]
    partial = {"image": img}
    tm = _Timer(partial)
    kernel = build_kernel(cfg.sigma)

    if cfg.slic.color_space == "lab":
        if cfg.smooth_rgb_first:
            blurred = tm.run("smooth", smooth, img, kernel)
            rgb_smooth = np.clip(np.floor(blurred + 0.5), 0, 255).astype(np.uint8)
            working = tm.run("rgb_to_lab", rgb_to_lab, rgb_smooth)
        else:
            lab = tm.run("rgb_to_lab", rgb_to_lab, img)
            working = tm.run("smooth", smooth, lab, kernel)
        lab_for_features = working
    else:
        working = tm.run("smooth", smooth, img, kernel)
        rgb_smooth = np.clip(np.floor(working + 0.5), 0, 255).astype(np.uint8)
        lab_for_features = tm.run("rgb_to_lab", rgb_to_lab, rgb_smooth)

    labels = tm.run("segment", slic.segment, working, cfg.slic)
    partial["labels"] = labels
    feats = tm.run("features", feat.extract_features, labels, lab_for_features)
    partial["features"] = feats

    def sample():
        zone = cfg.zone_for(w, h)
        partial["zone"] = zone
        hist = feat.sample_safe_zone_histogram(img, labels, zone)
        return zone, hist, set(hist.segment_ids)

    zone, hist, train_ids = tm.run("safe_zone", sample)
    model = tm.run(
        "train", floorseg.train_floor_model, feats, train_ids, cfg.ssd_multiplier, cfg.normalize
    )
    seed = floorseg.default_seed(zone)
    partial.update(model=model, seed=seed)
    region = tm.run("region_grow", floorseg.region_grow, labels, feats, model, seed)
    partial["region"] = region

    edges = lines = found = None
    if cfg.use_junctions:

        def junction_stage():
            jp = cfg.junctions
            camera = smooth(img, build_kernel(cfg.junction_sigma)) if cfg.junction_sigma else img
            camera = np.clip(np.floor(camera + 0.5), 0, 255).astype(np.uint8)
            gray = junctions.to_grayscale(camera)
            e = junctions.canny(gray, jp.canny_low, jp.canny_high, blur_sigma=0)
            src = e if jp.hough_on_edges else junctions.contour_point_map(junctions.trace_contours(e), e.shape)
            ls = junctions.hough_lines(src, jp.rho_res, jp.theta_res, jp.votes, jp.min_len, jp.max_gap, jp.seed)
            fj = junctions.find_floor_junctions(ls, jp.radius, jp.vertical_tol)
            return e, ls, fj, junctions.junction_mask((h, w), fj, jp.radius)

        edges, lines, found, jmask = tm.run("junctions", junction_stage)
    else:
        jmask = np.full((h, w), 255, dtype=np.uint8)
    occupancy = tm.run("mask", junctions.apply_junction_mask, region, jmask)

    scores = dict(zip((f.label for f in feats), floorseg.ssd_scores(feats, model)))
    classes = {k: (floorseg.FLOOR if s <= model.threshold else floorseg.NON_FLOOR) for k, s in scores.items()}
    total = time.perf_counter() - t_start
    return PipelineResult(
        occupancy=occupancy,
        labels=labels,
        features=feats,
        histogram=hist,
        timings=tm.timings,
        region=region,
        junction_mask=jmask,
        model=model,
        scores=scores,
        classes=classes,
        training_ids=train_ids,
        zone=zone,
        seed=seed,
        edges=edges,
        lines=lines,
        floor_junctions=found,
        total_time=total,
    )


def write_features_csv(path, result: PipelineResult) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", *feat.FEATURE_NAMES, "ssd", "class"])
        for f in result.features:
            cls = "FLOOR" if result.classes[f.label] == floorseg.FLOOR else "NON_FLOOR"
            writer.writerow([f.label, *[repr(float(v)) for v in f.vector()], repr(float(result.scores[f.label])), cls])


def draw_zone(img, zone: feat.SafeZone, color=(0, 255, 0)) -> np.ndarray:
    from skimage.draw import line as raster_line

    out = np.array(img, dtype=np.uint8, copy=True)
    h, w = out.shape[:2]
    v = zone.vertices
    for i in range(4):
        (x1, y1), (x2, y2) = v[i], v[(i + 1) % 4]
        rr, cc = raster_line(int(round(y1)), int(round(x1)), int(round(y2)), int(round(x2)))
        ok = (rr >= 0) & (rr < h) & (cc >= 0) & (cc < w)
        out[rr[ok], cc[ok]] = color
    return out


def diagnostic_overlay(img, labels=None, zone=None, seed=None) -> np.ndarray:
    """Superpixel boundaries, safe zone outline and seed marker over the frame."""
    out = np.array(img, dtype=np.uint8, copy=True)
    if labels is not None:
        out = slic.boundary_overlay(out, labels)
    if zone is not None:
        out = draw_zone(out, zone)
    if seed is not None:
        h, w = out.shape[:2]
        x, y = (int(round(c)) for c in seed.point)
        out[max(0, y - 3) : y + 4, max(0, x - 3) : x + 4] = (255, 0, 0)
    return out
