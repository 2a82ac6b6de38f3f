"""Image-plane to ground-plane mapping via a planar homography."""

from __future__ import annotations

import csv
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateConfiguration, EmptyTestSet, PointAtInfinity
from .imgcore import check_rgb

W_EPS = 1e-12
LUT_MAGIC = b"IPMLUT1\0"


@dataclass(frozen=True)
class PointCorrespondence:
    image_point: tuple
    ground_point: tuple

    def __post_init__(self):
        if not np.all(np.isfinite(list(self.image_point) + list(self.ground_point))):
            raise ValueError("correspondence coordinates must be finite")


@dataclass(frozen=True)
class Homography:
    """3x3 projective matrix, scaled so ``h[2, 2] == 1`` whenever that entry is nonzero."""

    h: np.ndarray

    def __post_init__(self):
        h = np.array(self.h, dtype=np.float64)
        if h.shape != (3, 3) or not np.all(np.isfinite(h)):
            raise ValueError("homography must be a finite 3x3 matrix")
        if abs(h[2, 2]) > W_EPS:
            h = h / h[2, 2]
        else:
            h = h / np.linalg.norm(h)
        if abs(np.linalg.det(h)) <= 1e-12:
            raise DegenerateConfiguration("homography matrix is singular")
        h.flags.writeable = False
        object.__setattr__(self, "h", h)

    def inverse(self) -> "Homography":
        return Homography(np.linalg.inv(self.h))

    def __matmul__(self, other: "Homography") -> "Homography":
        return Homography(self.h @ other.h)


def _collinear(a, b, c, tol=1e-9) -> bool:
    area = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    scale = max(np.hypot(b[0] - a[0], b[1] - a[1]) * np.hypot(c[0] - a[0], c[1] - a[1]), 1e-300)
    return abs(area) <= tol * scale


def _normalizer(pts: np.ndarray) -> np.ndarray:
    """Similarity moving the centroid to 0 and the RMS distance to sqrt(2)."""
    c = pts.mean(axis=0)
    rms = np.sqrt(np.mean(np.sum((pts - c) ** 2, axis=1)))
    if rms <= 0:
        raise DegenerateConfiguration("all points coincide")
    s = np.sqrt(2.0) / rms
    return np.array([[s, 0, -s * c[0]], [0, s, -s * c[1]], [0, 0, 1.0]])


def estimate_homography(correspondences) -> Homography:
    """Normalized direct linear transform.

    Four correspondences give the exact solution; more are solved in the
    least-squares sense through the SVD of the stacked 2n x 9 system.
    """
    corr = list(correspondences)
    if len(corr) < 4:
        raise DegenerateConfiguration(f"need at least 4 correspondences, got {len(corr)}")
    src = np.array([c.image_point for c in corr], dtype=np.float64)
    dst = np.array([c.ground_point for c in corr], dtype=np.float64)
    if len(corr) == 4:
        for pts in (src, dst):
            for i in range(4):
                tri = [pts[k] for k in range(4) if k != i]
                if _collinear(*tri):
                    raise DegenerateConfiguration("three of the four points are collinear")
    ts, td = _normalizer(src), _normalizer(dst)
    s = (np.c_[src, np.ones(len(src))] @ ts.T)[:, :2]
    d = (np.c_[dst, np.ones(len(dst))] @ td.T)[:, :2]
    rows = []
    for (x, y), (u, v) in zip(s, d):
        rows.append([-x, -y, -1, 0, 0, 0, u * x, u * y, u])
        rows.append([0, 0, 0, -x, -y, -1, v * x, v * y, v])
    a = np.asarray(rows)
    _, sv, vt = np.linalg.svd(a)
    # the null space must be one-dimensional
    if len(sv) >= 8 and sv[7] <= 1e-10 * sv[0]:
        raise DegenerateConfiguration("correspondence system is rank deficient")
    hn = vt[-1].reshape(3, 3)
    h = np.linalg.inv(td) @ hn @ ts
    return Homography(h)


def apply_homography(h: Homography, p) -> tuple:
    """Map one point ``(x, y)``; raises PointAtInfinity when ``|w| < 1e-12``."""
    m = h.h
    x, y = float(p[0]), float(p[1])
    w = m[2, 0] * x + m[2, 1] * y + m[2, 2]
    if abs(w) < W_EPS:
        raise PointAtInfinity(f"point {p} maps to infinity")
    return ((m[0, 0] * x + m[0, 1] * y + m[0, 2]) / w, (m[1, 0] * x + m[1, 1] * y + m[1, 2]) / w)


def apply_homography_array(h: Homography, xs, ys):
    """Vectorized mapping; returns ``(X, Y, valid)`` with NaN where ``|w| < 1e-12``.

    Evaluates the same expression, in the same order, as :func:`apply_homography`.
    """
    m = h.h
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    w = m[2, 0] * xs + m[2, 1] * ys + m[2, 2]
    valid = np.abs(w) >= W_EPS
    with np.errstate(divide="ignore", invalid="ignore"):
        gx = (m[0, 0] * xs + m[0, 1] * ys + m[0, 2]) / w
        gy = (m[1, 0] * xs + m[1, 1] * ys + m[1, 2]) / w
    gx = np.where(valid, gx, np.nan)
    gy = np.where(valid, gy, np.nan)
    return gx, gy, valid


def topdown_corners(out_w: int, out_h: int) -> list:
    """Destination corners: top-left, top-right, bottom-right, bottom-left."""
    return [(0.0, 0.0), (out_w - 1.0, 0.0), (out_w - 1.0, out_h - 1.0), (0.0, out_h - 1.0)]


def bilinear_sample(img: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Sample ``img`` at real coordinates; points outside the image become 0."""
    h, w = img.shape[:2]
    arr = img.astype(np.float64)
    finite = np.isfinite(xs) & np.isfinite(ys)
    # a hair of slack so corners mapped to -1e-15 by rounding still count
    tol = 1e-9
    inside = finite & (xs >= -tol) & (xs <= w - 1 + tol) & (ys >= -tol) & (ys <= h - 1 + tol)
    xs = np.where(inside, np.clip(xs, 0, w - 1), 0.0)
    ys = np.where(inside, np.clip(ys, 0, h - 1), 0.0)
    x0 = np.clip(np.floor(xs).astype(int), 0, max(w - 2, 0))
    y0 = np.clip(np.floor(ys).astype(int), 0, max(h - 2, 0))
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (xs - x0)[..., None]
    fy = (ys - y0)[..., None]
    top = arr[y0, x0] * (1 - fx) + arr[y0, x1] * fx
    bot = arr[y1, x0] * (1 - fx) + arr[y1, x1] * fx
    out = top * (1 - fy) + bot * fy
    out[~inside] = 0.0
    return out


def warp_topdown(img, roi, out_w: int, out_h: int):
    """Warp the quadrilateral ``roi`` (TL, TR, BR, BL) onto an ``out_w x out_h`` rectangle.

    Returns ``(warped, homography)`` where the homography maps source pixels to
    output pixels.
    """
    img = check_rgb(img)
    corr = [PointCorrespondence(tuple(p), q) for p, q in zip(roi, topdown_corners(out_w, out_h))]
    h = estimate_homography(corr)
    inv = h.inverse()
    yy, xx = np.mgrid[0:out_h, 0:out_w].astype(np.float64)
    sx, sy, valid = apply_homography_array(inv, xx, yy)
    sx = np.where(valid, sx, -1.0)
    sy = np.where(valid, sy, -1.0)
    out = bilinear_sample(img, sx, sy)
    return np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8), h


@dataclass
class LookupTable:
    """Ground coordinates for each pixel of a rectangular region ``(x0, y0, width, height)``."""

    roi: tuple
    ground_x: np.ndarray
    ground_y: np.ndarray
    valid: np.ndarray

    def lookup(self, x: int, y: int) -> tuple:
        x0, y0, _, _ = self.roi
        return float(self.ground_x[y - y0, x - x0]), float(self.ground_y[y - y0, x - x0])

    def to_csv(self, path) -> None:
        x0, y0, w, h = self.roi
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "y", "X", "Y", "valid"])
            for r in range(h):
                for c in range(w):
                    ok = bool(self.valid[r, c])
                    writer.writerow(
                        [
                            x0 + c,
                            y0 + r,
                            repr(float(self.ground_x[r, c])) if ok else "",
                            repr(float(self.ground_y[r, c])) if ok else "",
                            int(ok),
                        ]
                    )

    def to_bytes(self) -> bytes:
        """Binary form: magic ``IPMLUT1\\0``, four little-endian int32 (x0, y0, width, height),
        then row-major little-endian float64 (X, Y) pairs; invalid entries are NaN."""
        x0, y0, w, h = self.roi
        pairs = np.stack([self.ground_x, self.ground_y], axis=-1).astype("<f8")
        return LUT_MAGIC + struct.pack("<4i", x0, y0, w, h) + pairs.tobytes()

    def save_binary(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def from_bytes(cls, data: bytes) -> "LookupTable":
        if data[: len(LUT_MAGIC)] != LUT_MAGIC:
            raise ValueError("not an IPMLUT1 file")
        off = len(LUT_MAGIC)
        x0, y0, w, h = struct.unpack("<4i", data[off : off + 16])
        pairs = np.frombuffer(data[off + 16 :], dtype="<f8")
        if pairs.size != w * h * 2:
            raise ValueError("lookup table payload has the wrong size")
        pairs = pairs.reshape(h, w, 2).astype(np.float64)
        gx, gy = pairs[..., 0].copy(), pairs[..., 1].copy()
        return cls(roi=(x0, y0, w, h), ground_x=gx, ground_y=gy, valid=np.isfinite(gx) & np.isfinite(gy))

    @classmethod
    def load_binary(cls, path) -> "LookupTable":
        return cls.from_bytes(Path(path).read_bytes())


def build_lookup_table(h: Homography, roi) -> LookupTable:
    """``roi`` is ``(x0, y0, width, height)`` in pixels."""
    x0, y0, w, hh = (int(v) for v in roi)
    yy, xx = np.mgrid[y0 : y0 + hh, x0 : x0 + w].astype(np.float64)
    gx, gy, valid = apply_homography_array(h, xx, yy)
    return LookupTable(roi=(x0, y0, w, hh), ground_x=gx, ground_y=gy, valid=valid)


def reprojection_error(h: Homography, test_points) -> float:
    """Sum of squared ground-plane distances between mapped and reference points."""
    pts = list(test_points)
    if not pts:
        raise EmptyTestSet("no test points")
    total = 0.0
    for c in pts:
        gx, gy = apply_homography(h, c.image_point)
        total += (gx - c.ground_point[0]) ** 2 + (gy - c.ground_point[1]) ** 2
    return total


@dataclass
class Calibration:
    correspondences: list
    square_size_cm: float | None = None
    test_points: list | None = None

    @classmethod
    def load(cls, path) -> "Calibration":
        """Read ``{"points": [{"image": [x, y], "ground": [X, Y]}, ...], "square_size_cm": s}``.

        An optional ``"test_points"`` list in the same form holds held-out points.
        """
        cfg = json.loads(Path(path).read_text())

        def parse(items):
            return [PointCorrespondence(tuple(p["image"]), tuple(p["ground"])) for p in items]

        pts = cfg.get("points", cfg.get("correspondences"))
        if pts is None:
            raise ValueError(f"{path}: calibration needs a 'points' list")
        test = cfg.get("test_points")
        return cls(
            correspondences=parse(pts),
            square_size_cm=cfg.get("square_size_cm"),
            test_points=parse(test) if test else None,
        )

    def homography(self) -> Homography:
        return estimate_homography(self.correspondences)
