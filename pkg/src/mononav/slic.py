"""SLIC superpixels: localized k-means in joint color + image-plane space.

Pixels are 5-vectors ``[c0, c1, c2, x, y]`` where the color part is taken from
whatever working space the caller hands in (RGB or CIELAB), ``x`` is the
column and ``y`` the row.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from skimage.measure import label as _component_label

from .errors import EmptyImage, InvalidK, OutOfBounds

COLOR_SPACES = ("rgb", "lab")


@dataclass(frozen=True)
class SlicParams:
    k: int = 200
    m: float = 10.0
    iterations: int = 10
    color_space: str = "lab"
    # early exit once no center coordinate moves by more than this
    tol: float = 1e-3

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise InvalidK(f"k must be a positive integer, got {self.k}")
        if not self.m > 0:
            raise ValueError(f"compactness m must be positive, got {self.m}")
        if int(self.iterations) != self.iterations or self.iterations < 1:
            raise ValueError(f"iterations must be a positive integer, got {self.iterations}")
        if self.color_space not in COLOR_SPACES:
            raise ValueError(f"color_space must be one of {COLOR_SPACES}, got {self.color_space!r}")


@dataclass
class SlicStats:
    iterations_run: int = 0
    # number of distance evaluations made for each pixel, summed over iterations
    comparisons: np.ndarray | None = None
    residuals: list = field(default_factory=list)
    cluster_time: float = 0.0
    connectivity_time: float = 0.0


@dataclass
class SegmentLabels:
    """Per-pixel segment ids in ``[0, segment_count)`` plus per-segment statistics.

    ``centers`` rows are ``[c0, c1, c2, x, y]`` means over each segment's pixels;
    ``sizes`` are pixel counts.
    """

    labels: np.ndarray
    segment_count: int
    centers: np.ndarray
    sizes: np.ndarray
    stats: SlicStats | None = None

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @classmethod
    def from_array(cls, labels, img=None) -> "SegmentLabels":
        """Wrap an arbitrary integer label array, renumbering ids to be consecutive."""
        labels = np.asarray(labels)
        if labels.ndim != 2 or labels.size == 0:
            raise EmptyImage(f"labels must be a non-empty 2-D array, got shape {labels.shape}")
        _, dense = np.unique(labels, return_inverse=True)
        dense = dense.reshape(labels.shape).astype(np.int32)
        n = int(dense.max()) + 1
        if img is None:
            img = np.zeros(labels.shape + (3,))
        centers, sizes = segment_means(np.asarray(img, dtype=np.float64), dense, n)
        return cls(labels=dense, segment_count=n, centers=centers, sizes=sizes)


def grid_interval(n_pixels: int, k: int) -> float:
    """Seeding stride ``sqrt(N / K)``."""
    if not 1 <= k <= n_pixels:
        raise InvalidK(f"k={k} must lie in [1, {n_pixels}]")
    return math.sqrt(n_pixels / k)


def slic_distance(p1, p2, m: float, s: float) -> float:
    """Color distance plus spatial distance weighted by ``m / s``."""
    p1 = np.asarray(p1, dtype=np.float64)
    p2 = np.asarray(p2, dtype=np.float64)
    if not s > 0:
        raise ValueError("grid interval s must be positive")
    dc = math.sqrt(float(np.sum((p1[:3] - p2[:3]) ** 2)))
    ds = math.sqrt(float(np.sum((p1[3:5] - p2[3:5]) ** 2)))
    return dc + (m / s) * ds


def image_gradient(img, x: int, y: int) -> float:
    """Squared color difference across the pixel, horizontally plus vertically."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape[:2]
    if not (1 <= x <= w - 2 and 1 <= y <= h - 2):
        raise OutOfBounds(f"gradient undefined at border pixel ({x}, {y}) of a {w}x{h} image")
    gx = img[y, x + 1] - img[y, x - 1]
    gy = img[y + 1, x] - img[y - 1, x]
    return float(np.sum(gx * gx) + np.sum(gy * gy))


def gradient_map(img: np.ndarray) -> np.ndarray:
    """:func:`image_gradient` at every pixel; border pixels are ``inf``."""
    h, w = img.shape[:2]
    g = np.full((h, w), np.inf)
    if h >= 3 and w >= 3:
        gx = img[1:-1, 2:] - img[1:-1, :-2]
        gy = img[2:, 1:-1] - img[:-2, 1:-1]
        g[1:-1, 1:-1] = np.sum(gx * gx, axis=-1) + np.sum(gy * gy, axis=-1)
    return g


def _as_working(img) -> np.ndarray:
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise EmptyImage(f"expected a non-empty (H, W, 3) image, got shape {arr.shape}")
    return arr


def grid_positions(length: int, s: float) -> np.ndarray:
    """Seed coordinates ``(i + 0.5) s`` along one axis that fall inside ``[0, length)``."""
    n = max(1, math.ceil(length / s - 0.5))
    return np.clip(np.floor((np.arange(n) + 0.5) * s), 0, length - 1).astype(int)


def seed_centers(img: np.ndarray, s: float) -> np.ndarray:
    """Regular grid seeds moved to the lowest gradient in their 3x3 neighborhood."""
    h, w = img.shape[:2]
    xs = grid_positions(w, s)
    ys = grid_positions(h, s)
    grad = gradient_map(img)
    # center first so it wins ties
    offsets = [(0, 0)] + [(dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if (dy, dx) != (0, 0)]
    centers = []
    for y in ys:
        for x in xs:
            best, by, bx = math.inf, y, x
            for dy, dx in offsets:
                yy, xx = y + dy, x + dx
                if 0 <= yy < h and 0 <= xx < w and grad[yy, xx] < best:
                    best, by, bx = grad[yy, xx], yy, xx
            centers.append([*img[by, bx], float(bx), float(by)])
    return np.asarray(centers, dtype=np.float64)


def assign_pixels(img: np.ndarray, centers: np.ndarray, m: float, s: float, comparisons=None):
    """Label every pixel with the nearest center whose ``2s x 2s`` window covers it.

    Centers are visited in index order and only a strictly smaller distance
    overrides, so the lowest index wins ties. Pixels covered by no window get
    label -1. ``comparisons``, if given, is incremented per distance evaluation.
    """
    h, w = img.shape[:2]
    labels = np.full((h, w), -1, dtype=np.int32)
    dist = np.full((h, w), np.inf)
    ratio = m / s
    for k, c in enumerate(centers):
        cx, cy = c[3], c[4]
        x0, x1 = max(0, math.ceil(cx - s)), min(w - 1, math.floor(cx + s))
        y0, y1 = max(0, math.ceil(cy - s)), min(h - 1, math.floor(cy + s))
        if x0 > x1 or y0 > y1:
            continue
        win = img[y0 : y1 + 1, x0 : x1 + 1]
        d0 = win[..., 0] - c[0]
        d1 = win[..., 1] - c[1]
        d2 = win[..., 2] - c[2]
        dx = np.arange(x0, x1 + 1) - cx
        dy = (np.arange(y0, y1 + 1) - cy)[:, None]
        d = np.sqrt(d0 * d0 + d1 * d1 + d2 * d2) + ratio * np.sqrt(dx * dx + dy * dy)
        dview = dist[y0 : y1 + 1, x0 : x1 + 1]
        better = d < dview
        dview[better] = d[better]
        labels[y0 : y1 + 1, x0 : x1 + 1][better] = k
        if comparisons is not None:
            comparisons[y0 : y1 + 1, x0 : x1 + 1] += 1
    return labels, dist


def segment_means(img: np.ndarray, labels: np.ndarray, n: int):
    """Mean ``[c0, c1, c2, x, y]`` and pixel count of each label in ``[0, n)``; -1 is ignored."""
    h, w = labels.shape
    flat = labels.ravel()
    valid = flat >= 0
    idx = flat[valid]
    sizes = np.bincount(idx, minlength=n).astype(np.int64)
    sums = np.empty((n, 5))
    pix = img.reshape(-1, 3)[valid]
    for ch in range(3):
        sums[:, ch] = np.bincount(idx, weights=pix[:, ch], minlength=n)
    yy, xx = np.divmod(np.flatnonzero(valid), w)
    sums[:, 3] = np.bincount(idx, weights=xx, minlength=n)
    sums[:, 4] = np.bincount(idx, weights=yy, minlength=n)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = sums / sizes[:, None]
    return means, sizes


def update_centers(img: np.ndarray, labels: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Recompute centers as member means; a center with no members stays put."""
    means, sizes = segment_means(img, labels, len(centers))
    empty = sizes == 0
    means[empty] = centers[empty]
    return means


def enforce_connectivity(labels: np.ndarray, min_size: float):
    """Make every segment 4-connected.

    Each cluster keeps its largest 4-connected fragment if that fragment has at
    least ``min_size`` pixels. Every other fragment (including unassigned -1
    pixels) is absorbed, in breadth-first rounds, by the largest adjacent kept
    segment. Returns consecutive labels ``0..n-1`` and ``n``.
    """
    h, w = labels.shape
    frag = _component_label(labels.astype(np.int64) + 2, background=0, connectivity=1)
    frag = frag.astype(np.int64) - 1  # fragment ids 0..F-1
    nfrag = int(frag.max()) + 1
    flat = frag.ravel()
    sizes = np.bincount(flat, minlength=nfrag)
    owner = np.empty(nfrag, dtype=np.int64)
    owner[flat] = labels.ravel()

    # largest fragment per cluster (ties -> lowest fragment id)
    order = np.lexsort((np.arange(nfrag), -sizes, owner))
    first = np.ones(nfrag, dtype=bool)
    first[1:] = owner[order][1:] != owner[order][:-1]
    keep = np.zeros(nfrag, dtype=bool)
    keep[order[first]] = True
    keep &= (owner >= 0) & (sizes >= min_size)
    if not keep.any():
        keep[int(np.argmax(sizes))] = True

    group = np.full(nfrag, -1, dtype=np.int64)
    kept = np.flatnonzero(keep)
    group[kept] = np.arange(len(kept))
    gsize = sizes[kept].astype(np.int64)

    if not keep.all():
        a = np.concatenate([frag[:, :-1].ravel(), frag[:-1, :].ravel()])
        b = np.concatenate([frag[:, 1:].ravel(), frag[1:, :].ravel()])
        diff = a != b
        a, b = a[diff], b[diff]
        code = np.unique(np.concatenate([a * nfrag + b, b * nfrag + a]))
        eu, ev = np.divmod(code, nfrag)
        while True:
            gu, gv = group[eu], group[ev]
            cand = (gu < 0) & (gv >= 0)
            if not cand.any():
                break
            u, g = eu[cand], gv[cand]
            order = np.lexsort((g, -gsize[g], u))
            u, g = u[order], g[order]
            head = np.ones(len(u), dtype=bool)
            head[1:] = u[1:] != u[:-1]
            u, g = u[head], g[head]
            group[u] = g
            np.add.at(gsize, g, sizes[u])
        if (group < 0).any():
            raise RuntimeError("connectivity enforcement left unreachable fragments")

    # renumber in order of the owning cluster id for stable output
    rank = np.argsort(owner[kept], kind="stable")
    remap = np.empty(len(kept), dtype=np.int32)
    remap[rank] = np.arange(len(kept), dtype=np.int32)
    out = remap[group[frag]]
    return out.astype(np.int32), len(kept)


def segment(img, params: SlicParams | None = None) -> SegmentLabels:
    """Run SLIC on an already smoothed working-space image of shape ``(H, W, 3)``."""
    params = params or SlicParams()
    img = _as_working(img)
    h, w = img.shape[:2]
    s = grid_interval(h * w, params.k)
    stats = SlicStats(comparisons=np.zeros((h, w), dtype=np.int32))

    t0 = time.perf_counter()
    centers = seed_centers(img, s)
    labels = None
    for _ in range(params.iterations):
        labels, _ = assign_pixels(img, centers, params.m, s, stats.comparisons)
        new = update_centers(img, labels, centers)
        residual = float(np.max(np.abs(new - centers)))
        stats.residuals.append(float(np.sum(np.abs(new - centers))))
        centers = new
        stats.iterations_run += 1
        if residual < params.tol:
            break
    t1 = time.perf_counter()
    final, n = enforce_connectivity(labels, s * s / 4.0)
    t2 = time.perf_counter()
    stats.cluster_time = t1 - t0
    stats.connectivity_time = t2 - t1

    means, sizes = segment_means(img, final, n)
    return SegmentLabels(labels=final, segment_count=n, centers=means, sizes=sizes, stats=stats)


def boundaries(labels: np.ndarray) -> np.ndarray:
    """Boolean map of pixels whose right or lower neighbor has another label."""
    lab = labels.labels if isinstance(labels, SegmentLabels) else np.asarray(labels)
    edge = np.zeros(lab.shape, dtype=bool)
    edge[:, :-1] |= lab[:, :-1] != lab[:, 1:]
    edge[:-1, :] |= lab[:-1, :] != lab[1:, :]
    return edge


def boundary_overlay(img_rgb, labels, color=(255, 255, 0)) -> np.ndarray:
    out = np.array(img_rgb, dtype=np.uint8, copy=True)
    out[boundaries(labels)] = color
    return out
