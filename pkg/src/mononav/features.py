"""Safe zone geometry, per-superpixel masks, shape/color features and histograms."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, EmptyIntersection, UnknownLabel
from .imgcore import BLACK, WHITE, check_rgb
from .slic import SegmentLabels

# bottom-left, bottom-right, top-right, top-left as fractions of (W, H)
DEFAULT_ZONE_FRACTIONS = ((0.20, 0.99), (0.80, 0.99), (0.65, 0.75), (0.35, 0.75))

FEATURE_NAMES = ("l", "a", "b", "area", "width", "height", "diagonal")


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _segments_intersect(p1, p2, q1, q2) -> bool:
    d1, d2 = _cross(q1, q2, p1), _cross(q1, q2, p2)
    d3, d4 = _cross(p1, p2, q1), _cross(p1, p2, q2)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and 0 not in (d1, d2, d3, d4):
        return True

    def on(a, b, c):
        return (
            _cross(a, b, c) == 0
            and min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])
        )

    return on(q1, q2, p1) or on(q1, q2, p2) or on(p1, p2, q1) or on(p1, p2, q2)


@dataclass(frozen=True)
class SafeZone:
    """Trapezoid in image coordinates: bottom-left, bottom-right, top-right, top-left."""

    vertices: tuple

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        if len(verts) != 4:
            raise ValueError("a safe zone needs exactly four vertices")
        object.__setattr__(self, "vertices", verts)
        if abs(self.area) <= 0:
            raise ValueError("safe zone has zero area")
        v = verts
        if _segments_intersect(v[0], v[1], v[2], v[3]) or _segments_intersect(v[1], v[2], v[3], v[0]):
            raise ValueError("safe zone polygon is self-intersecting")

    @classmethod
    def default(cls, width: int, height: int) -> "SafeZone":
        return cls.from_fractions(DEFAULT_ZONE_FRACTIONS, width, height)

    @classmethod
    def from_fractions(cls, fractions, width: int, height: int) -> "SafeZone":
        return cls(tuple((fx * width, fy * height) for fx, fy in fractions))

    @classmethod
    def from_config(cls, cfg, width: int, height: int) -> "SafeZone":
        """Build from ``{"vertices": [[x, y] x4], "relative": bool}`` (a dict or JSON path)."""
        if isinstance(cfg, (str, Path)):
            cfg = json.loads(Path(cfg).read_text())
        if "safe_zone" in cfg:
            cfg = cfg["safe_zone"]
        verts = cfg["vertices"]
        if cfg.get("relative", False):
            return cls.from_fractions(verts, width, height)
        return cls(tuple(verts))

    @property
    def area(self) -> float:
        x = np.array([p[0] for p in self.vertices])
        y = np.array([p[1] for p in self.vertices])
        return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))

    @property
    def centroid(self) -> tuple:
        x = np.array([p[0] for p in self.vertices])
        y = np.array([p[1] for p in self.vertices])
        xn, yn = np.roll(x, -1), np.roll(y, -1)
        c = x * yn - xn * y
        a = 0.5 * c.sum()
        return float(((x + xn) * c).sum() / (6 * a)), float(((y + yn) * c).sum() / (6 * a))

    def validate(self, width: int, height: int) -> None:
        # vertices live in the continuous image extent, not just on pixel centers
        for x, y in self.vertices:
            if not (0 <= x <= width and 0 <= y <= height):
                raise ValueError(f"safe zone vertex ({x}, {y}) lies outside a {width}x{height} image")

    def mask(self, height: int, width: int) -> np.ndarray:
        """Boolean map of pixels inside the polygon, boundary included."""
        self.validate(width, height)
        yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
        inside = np.zeros((height, width), dtype=bool)
        on_edge = np.zeros((height, width), dtype=bool)
        v = self.vertices
        for i in range(4):
            (x1, y1), (x2, y2) = v[i], v[(i + 1) % 4]
            cross = (x2 - x1) * (yy - y1) - (y2 - y1) * (xx - x1)
            seglen = np.hypot(x2 - x1, y2 - y1)
            within = (
                (xx >= min(x1, x2) - 1e-9)
                & (xx <= max(x1, x2) + 1e-9)
                & (yy >= min(y1, y2) - 1e-9)
                & (yy <= max(y1, y2) + 1e-9)
            )
            on_edge |= within & (np.abs(cross) <= 1e-9 * max(seglen, 1.0))
            if y1 != y2:
                straddle = (y1 > yy) != (y2 > yy)
                x_at = x1 + (yy - y1) * (x2 - x1) / (y2 - y1)
                inside ^= straddle & (xx < x_at)
        return inside | on_edge


@dataclass(frozen=True)
class SuperpixelFeatures:
    label: int
    l: float
    a: float
    b: float
    area: int
    width: int
    height: int
    diagonal: int
    center: tuple

    def vector(self) -> np.ndarray:
        """The 7 classification features in ``FEATURE_NAMES`` order."""
        return np.array(
            [self.l, self.a, self.b, self.area, self.width, self.height, self.diagonal],
            dtype=np.float64,
        )


@dataclass
class ColorHistogram:
    """256-bin counts of the sampled pixels, per channel, in B, G, R order."""

    b: np.ndarray
    g: np.ndarray
    r: np.ndarray
    segment_ids: frozenset
    pixel_count: int

    def channels(self):
        return (("B", self.b), ("G", self.g), ("R", self.r))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["channel", "bin", "count"])
            for name, counts in self.channels():
                for i, c in enumerate(counts):
                    writer.writerow([name, i, int(c)])


def _labels_array(labels) -> np.ndarray:
    return labels.labels if isinstance(labels, SegmentLabels) else np.asarray(labels)


def _segment_count(labels) -> int:
    if isinstance(labels, SegmentLabels):
        return labels.segment_count
    return int(np.asarray(labels).max()) + 1


def superpixel_mask(labels, seg_val: int) -> np.ndarray:
    """WHITE where the label equals ``seg_val``, BLACK elsewhere."""
    lab = _labels_array(labels)
    if not 0 <= seg_val < _segment_count(labels) or not np.any(lab == seg_val):
        raise UnknownLabel(seg_val)
    return np.where(lab == seg_val, WHITE, BLACK).astype(np.uint8)


def _run(line: np.ndarray, idx: int) -> int:
    """Length of the run of ``line[idx]``'s value that contains ``idx``."""
    val = line[idx]
    left = np.flatnonzero(line[:idx][::-1] != val)
    right = np.flatnonzero(line[idx + 1 :] != val)
    n_left = left[0] if left.size else idx
    n_right = right[0] if right.size else len(line) - idx - 1
    return int(n_left + n_right + 1)


def _center_pixel(lab: np.ndarray, seg: int, ys: np.ndarray, xs: np.ndarray):
    my, mx = ys.mean(), xs.mean()
    h, w = lab.shape
    cy = int(min(max(np.floor(my + 0.5), 0), h - 1))
    cx = int(min(max(np.floor(mx + 0.5), 0), w - 1))
    if lab[cy, cx] == seg:
        return cx, cy
    # concave segment: nearest member pixel to the mean, lowest raster index on ties
    i = int(np.argmin((ys - my) ** 2 + (xs - mx) ** 2))
    return int(xs[i]), int(ys[i])


def extract_features(labels, img) -> list:
    """Compute :class:`SuperpixelFeatures` for every segment.

    Width and height are the lengths of the same-label runs through the center
    pixel along its row and column. The diagonal is the same-label run along
    the two 45 degree lines through the center, with the center counted once.
    """
    lab = _labels_array(labels)
    img = np.asarray(img, dtype=np.float64)
    if img.shape[:2] != lab.shape:
        raise DimensionMismatch(f"labels {lab.shape} do not match image {img.shape[:2]}")
    h, w = lab.shape
    n = _segment_count(labels)
    order = np.argsort(lab, axis=None, kind="stable")
    counts = np.bincount(lab.ravel(), minlength=n)
    bounds = np.concatenate([[0], np.cumsum(counts)])
    out = []
    for seg in range(n):
        members = order[bounds[seg] : bounds[seg + 1]]
        if members.size == 0:
            continue
        ys, xs = np.divmod(members, w)
        cx, cy = _center_pixel(lab, seg, ys, xs)
        width = _run(lab[cy, :], cx)
        height = _run(lab[:, cx], cy)
        # main diagonal (down-right) and anti-diagonal (down-left) through the center
        main = np.diagonal(lab, offset=cx - cy)
        anti = np.diagonal(lab[:, ::-1], offset=(w - 1 - cx) - cy)
        diag = _run(main, min(cx, cy)) + _run(anti, min(w - 1 - cx, cy)) - 1
        color = img[cy, cx]
        out.append(
            SuperpixelFeatures(
                label=seg,
                l=float(color[0]),
                a=float(color[1]),
                b=float(color[2]),
                area=int(members.size),
                width=width,
                height=height,
                diagonal=int(diag),
                center=(cx, cy),
            )
        )
    return out


def safe_zone_superpixels(labels, zone: SafeZone) -> set:
    """Ids of segments with at least one pixel inside ``zone``."""
    lab = _labels_array(labels)
    inside = zone.mask(*lab.shape)
    return {int(v) for v in np.unique(lab[inside])}


def sample_safe_zone_histogram(img, labels, zone: SafeZone) -> ColorHistogram:
    """Histogram every pixel of every segment touching the safe zone."""
    img = check_rgb(img)
    lab = _labels_array(labels)
    if img.shape[:2] != lab.shape:
        raise DimensionMismatch(f"labels {lab.shape} do not match image {img.shape[:2]}")
    ids = safe_zone_superpixels(lab, zone)
    if not ids:
        raise EmptyIntersection("no superpixel intersects the safe zone")
    sampled = np.isin(lab, list(ids))
    pix = img[sampled]
    r, g, b = (np.bincount(pix[:, c], minlength=256).astype(np.int64) for c in range(3))
    return ColorHistogram(b=b, g=g, r=r, segment_ids=frozenset(ids), pixel_count=int(pix.shape[0]))
