"""Floor-junction detection on the camera image and the resulting occupancy mask.

Edges come from a Canny detector, contours from Suzuki-Abe border following,
and line segments from a progressive probabilistic Hough transform. A vertical
segment whose bottom end lies near a non-vertical segment marks a place where
an obstacle meets the floor; everything above that junction is masked out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DimensionMismatch, InvalidThresholds
from .imgcore import BLACK, WHITE, check_mask, check_rgb
from .preprocess import build_kernel, smooth

CANNY_BLUR_SIGMA = 1.4
GRADIENT_DECIMALS = 6


@dataclass(frozen=True)
class LineSegment:
    p1: tuple
    p2: tuple

    def __post_init__(self):
        if tuple(self.p1) == tuple(self.p2):
            raise ValueError("degenerate line segment")

    @property
    def orientation(self) -> float:
        """Angle from the image vertical in degrees, in [0, 90]."""
        dx = abs(self.p2[0] - self.p1[0])
        dy = abs(self.p2[1] - self.p1[1])
        return math.degrees(math.atan2(dx, dy))

    @property
    def length(self) -> float:
        return math.hypot(self.p2[0] - self.p1[0], self.p2[1] - self.p1[1])

    @property
    def bottom(self) -> tuple:
        """Endpoint with the larger row coordinate."""
        return self.p1 if self.p1[1] >= self.p2[1] else self.p2

    def y_at(self, x: float) -> float:
        """Row of the infinite line through the segment at column ``x``."""
        (x1, y1), (x2, y2) = self.p1, self.p2
        if x1 == x2:
            return float(max(y1, y2))
        return y1 + (x - x1) * (y2 - y1) / (x2 - x1)

    def distance_to(self, p) -> float:
        """Euclidean distance from ``p`` to the closest point of the segment."""
        (x1, y1), (x2, y2) = self.p1, self.p2
        vx, vy = x2 - x1, y2 - y1
        t = ((p[0] - x1) * vx + (p[1] - y1) * vy) / (vx * vx + vy * vy)
        t = min(max(t, 0.0), 1.0)
        return math.hypot(p[0] - (x1 + t * vx), p[1] - (y1 + t * vy))


@dataclass(frozen=True)
class FloorJunction:
    vertical: LineSegment
    floor_line: LineSegment

    @property
    def anchor(self) -> tuple:
        return self.vertical.bottom


@dataclass(frozen=True)
class JunctionParams:
    canny_low: float = 50.0
    canny_high: float = 150.0
    rho_res: float = 1.0
    theta_res: float = 1.0
    votes: int = 30
    min_len: float = 30.0
    max_gap: float = 10.0
    vertical_tol: float = 10.0
    radius: float = 15.0
    seed: int = 0
    # run Hough on the raw edge map instead of traced contour points
    hough_on_edges: bool = False


def to_grayscale(img) -> np.ndarray:
    """BT.601 luma, rounded half up to ``uint8``."""
    img = check_rgb(img).astype(np.float64)
    y = 0.299 * img[..., 0] + 0.587 * img[..., 1] + 0.114 * img[..., 2]
    return np.clip(np.floor(y + 0.5), 0, 255).astype(np.uint8)


# ---------------------------------------------------------------------- Canny

_SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)


def sobel_gradients(gray: np.ndarray):
    g = np.asarray(gray, dtype=np.float64)
    gx = ndimage.correlate(g, _SOBEL_X, mode="mirror")
    gy = ndimage.correlate(g, _SOBEL_X.T, mode="mirror")
    return gx, gy


def non_max_suppression(mag: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Keep gradient maxima along the quantized gradient direction.

    A pixel survives when it is strictly greater than the neighbor behind it
    and no smaller than the one ahead, which thins symmetric ridges to one pixel.
    """
    h, w = mag.shape
    out = np.zeros_like(mag)
    if h < 3 or w < 3:
        return out
    angle = np.rad2deg(np.arctan2(gy, gx)) % 180.0
    m = mag[1:-1, 1:-1]
    a = angle[1:-1, 1:-1]
    # (row, col) offset of the "ahead" neighbor for each direction bin
    bins = [
        ((a < 22.5) | (a >= 157.5), (0, 1)),
        ((a >= 22.5) & (a < 67.5), (1, 1)),
        ((a >= 67.5) & (a < 112.5), (1, 0)),
        ((a >= 112.5) & (a < 157.5), (1, -1)),
    ]
    keep = np.zeros_like(m, dtype=bool)
    for sel, (dr, dc) in bins:
        ahead = mag[1 + dr : h - 1 + dr, 1 + dc : w - 1 + dc]
        behind = mag[1 - dr : h - 1 - dr, 1 - dc : w - 1 - dc]
        keep |= sel & (m > behind) & (m >= ahead)
    out[1:-1, 1:-1] = np.where(keep, m, 0.0)
    return out


def canny(gray, low: float = 50.0, high: float = 150.0, blur_sigma: float = CANNY_BLUR_SIGMA) -> np.ndarray:
    """Binary edge map (``bool``) of a single-channel image.

    Gaussian blur, 3x3 Sobel gradients (L2 magnitude), non-maximum
    suppression, then hysteresis: pixels at or above ``low`` survive only when
    8-connected to a pixel at or above ``high``.
    """
    if not 0 <= low <= high:
        raise InvalidThresholds(f"need 0 <= low <= high, got low={low}, high={high}")
    g = np.asarray(gray, dtype=np.float64)
    if g.ndim != 2:
        raise DimensionMismatch("canny expects a single-channel image")
    if blur_sigma:
        g = smooth(g, build_kernel(blur_sigma))
    gx, gy = sobel_gradients(g)
    # quantize so mathematically equal responses compare equal; otherwise
    # rounding noise from the blur decides NMS ties and a brightness offset
    # can flip them
    gx = np.round(gx, GRADIENT_DECIMALS)
    gy = np.round(gy, GRADIENT_DECIMALS)
    mag = np.hypot(gx, gy)
    thin = non_max_suppression(mag, gx, gy)
    weak = thin >= max(low, np.finfo(float).tiny)
    strong = thin >= max(high, np.finfo(float).tiny)
    comp, n = ndimage.label(weak, structure=np.ones((3, 3), dtype=bool))
    if n == 0:
        return np.zeros_like(weak)
    has_strong = np.zeros(n + 1, dtype=bool)
    has_strong[np.unique(comp[strong])] = True
    has_strong[0] = False
    return has_strong[comp]


# ------------------------------------------------------------ border following

# counterclockwise on screen (row axis points down), starting east
_DIRS = ((0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1))
_DIR_INDEX = {d: i for i, d in enumerate(_DIRS)}


def _follow(f, i, j, i2, j2, nbd):
    """Trace one border starting at (i, j) with (i2, j2) its known zero neighbor."""
    start = _DIR_INDEX[(i2 - i, j2 - j)]
    # 3.1: clockwise search for a nonzero neighbor
    found = None
    for k in range(8):
        d = (start - k) % 8
        di, dj = _DIRS[d]
        if f[i + di, j + dj] != 0:
            found = (i + di, j + dj)
            break
    if found is None:
        f[i, j] = -nbd
        return [(i, j)]
    i1, j1 = found
    i2, j2 = i1, j1
    i3, j3 = i, j
    points = []
    while True:
        points.append((i3, j3))
        # 3.3: counterclockwise search starting just after (i2, j2)
        d0 = _DIR_INDEX[(i2 - i3, j2 - j3)]
        east_zero = False
        for k in range(1, 9):
            d = (d0 + k) % 8
            di, dj = _DIRS[d]
            if f[i3 + di, j3 + dj] != 0:
                i4, j4 = i3 + di, j3 + dj
                break
            if d == 0:
                east_zero = True
        # 3.4
        if east_zero:
            f[i3, j3] = -nbd
        elif f[i3, j3] == 1:
            f[i3, j3] = nbd
        # 3.5
        if (i4, j4) == (i, j) and (i3, j3) == (i1, j1):
            return points
        i2, j2 = i3, j3
        i3, j3 = i4, j4


def trace_contours(edges, include_holes: bool = False) -> list:
    """Suzuki-Abe border following on a binary image.

    Returns a list of contours, each a list of ``(x, y)`` points in tracing
    order. Only outer borders are returned unless ``include_holes``; borders of
    isolated single pixels are dropped.
    """
    e = np.asarray(edges).astype(bool)
    h, w = e.shape
    f = np.zeros((h + 2, w + 2), dtype=np.int32)
    f[1:-1, 1:-1] = e
    nz = f != 0
    cand = nz & (~np.roll(nz, 1, axis=1) | ~np.roll(nz, -1, axis=1))
    contours = []
    nbd = 1
    for i, j in zip(*np.nonzero(cand)):
        i, j = int(i), int(j)
        if f[i, j] == 1 and f[i, j - 1] == 0:
            nbd += 1
            pts = _follow(f, i, j, i, j - 1, nbd)
            outer = True
        elif f[i, j] >= 1 and f[i, j + 1] == 0:
            nbd += 1
            pts = _follow(f, i, j, i, j + 1, nbd)
            outer = False
        else:
            continue
        if len(pts) < 2 or not (outer or include_holes):
            continue
        contours.append([(pj - 1, pi - 1) for pi, pj in pts])
    return contours


def contour_point_map(contours, shape) -> np.ndarray:
    out = np.zeros(shape, dtype=bool)
    for c in contours:
        pts = np.asarray(c)
        out[pts[:, 1], pts[:, 0]] = True
    return out


# ---------------------------------------------------------------------- Hough

_SHIFT = 16


def hough_lines(
    edges,
    rho_res: float = 1.0,
    theta_res: float = 1.0,
    votes: int = 30,
    min_len: float = 30.0,
    max_gap: float = 10.0,
    seed: int = 0,
) -> list:
    """Progressive probabilistic Hough transform.

    Edge points are visited in a random order drawn from ``seed``. Each point
    votes into the ``(theta, rho)`` accumulator; once one of its cells reaches
    ``votes``, a 3-pixel-wide corridor along that direction is walked both
    ways, bridging gaps of up to ``max_gap`` pixels. Walked points are removed from further
    consideration, and when the segment is at least ``min_len`` long it is kept
    and the votes of its points are withdrawn.
    """
    if not (rho_res > 0 and theta_res > 0):
        raise ValueError("Hough resolutions must be positive")
    mask = np.asarray(edges).astype(bool).copy()
    h, w = mask.shape
    ys, xs = np.nonzero(mask)
    if xs.size == 0:
        return []
    theta = np.deg2rad(theta_res)
    numangle = max(1, int(round(math.pi / theta)))
    numrho = int(round(((w + h) * 2 + 1) / rho_res))
    angles = np.arange(numangle) * theta
    cos_t = np.cos(angles) / rho_res
    sin_t = np.sin(angles) / rho_res
    offset = (numrho - 1) // 2
    rows = np.arange(numangle)
    accum = np.zeros((numangle, numrho), dtype=np.int32)
    voted = np.zeros((h, w), dtype=bool)

    def cells(x, y):
        return np.floor(x * cos_t + y * sin_t + 0.5).astype(np.intp) + offset

    rng = np.random.default_rng(seed)
    order = rng.permutation(xs.size)
    lines = []
    one = 1 << _SHIFT
    half = 1 << (_SHIFT - 1)

    for idx in order:
        x0p, y0p = int(xs[idx]), int(ys[idx])
        if not mask[y0p, x0p]:
            continue
        r = cells(x0p, y0p)
        accum[rows, r] += 1
        voted[y0p, x0p] = True
        vals = accum[rows, r]
        best = int(np.argmax(vals))
        if vals[best] < votes:
            continue

        # direction along the line for normal angle theta
        a = -math.sin(angles[best])
        b = math.cos(angles[best])
        if abs(a) > abs(b):
            xflag = True
            dx0 = 1 if a > 0 else -1
            dy0 = int(round(b * one / abs(a)))
            sx, sy = x0p, (y0p << _SHIFT) + half
        else:
            xflag = False
            dy0 = 1 if b > 0 else -1
            dx0 = int(round(a * one / abs(b)))
            sx, sy = (x0p << _SHIFT) + half, y0p

        # the walk tolerates one pixel of drift across the direction of travel,
        # which absorbs the angular quantization of the accumulator
        side = (0, 1) if xflag else (1, 0)
        ends = [(x0p, y0p), (x0p, y0p)]
        steps = [0, 0]
        for k in range(2):
            gap = 0
            x, y = sx, sy
            dx, dy = (dx0, dy0) if k == 0 else (-dx0, -dy0)
            n = 0
            while True:
                if xflag:
                    j1, i1 = x, y >> _SHIFT
                else:
                    j1, i1 = x >> _SHIFT, y
                if not (0 <= j1 < w and 0 <= i1 < h):
                    break
                hit = None
                for off in (0, -1, 1):
                    jj, ii = j1 + off * side[1], i1 + off * side[0]
                    if 0 <= jj < w and 0 <= ii < h and mask[ii, jj]:
                        hit = (jj, ii)
                        break
                if hit is not None:
                    gap = 0
                    ends[k] = hit
                    steps[k] = n
                else:
                    gap += 1
                    if gap > max_gap:
                        break
                x += dx
                y += dy
                n += 1

        good = math.hypot(ends[1][0] - ends[0][0], ends[1][1] - ends[0][1]) >= min_len

        for k in range(2):
            x, y = sx, sy
            dx, dy = (dx0, dy0) if k == 0 else (-dx0, -dy0)
            for _ in range(steps[k] + 1):
                if xflag:
                    j1, i1 = x, y >> _SHIFT
                else:
                    j1, i1 = x >> _SHIFT, y
                for off in (0, -1, 1):
                    jj, ii = j1 + off * side[1], i1 + off * side[0]
                    if 0 <= jj < w and 0 <= ii < h and mask[ii, jj]:
                        if good and voted[ii, jj]:
                            accum[rows, cells(jj, ii)] -= 1
                            voted[ii, jj] = False
                        mask[ii, jj] = False
                x += dx
                y += dy

        if good and ends[0] != ends[1]:
            lines.append(LineSegment(ends[0], ends[1]))
    return lines


# ------------------------------------------------------------------ junctions


def find_floor_junctions(lines, radius: float = 15.0, vertical_tol: float = 10.0) -> list:
    """Pair every vertical segment with each non-vertical segment passing within
    ``radius`` of its bottom endpoint."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    vertical = [ln for ln in lines if ln.orientation <= vertical_tol]
    other = [ln for ln in lines if ln.orientation > vertical_tol]
    out = []
    for vl in vertical:
        anchor = vl.bottom
        for fl in other:
            if fl.distance_to(anchor) <= radius:
                out.append(FloorJunction(vertical=vl, floor_line=fl))
    return out


def junction_mask(dims, junctions, radius: float = 15.0) -> np.ndarray:
    """WHITE mask with every junction's band blacked out.

    The band spans the vertical segment's columns widened by ``radius`` on each
    side; at each column, rows above the floor line (extended as an infinite
    line) are BLACK.
    """
    h, w = dims
    mask = np.full((h, w), WHITE, dtype=np.uint8)
    rows = np.arange(h)
    for fj in junctions:
        xs = (fj.vertical.p1[0], fj.vertical.p2[0])
        c0 = max(0, int(math.ceil(min(xs) - radius)))
        c1 = min(w - 1, int(math.floor(max(xs) + radius)))
        for c in range(c0, c1 + 1):
            y_floor = fj.floor_line.y_at(c)
            mask[rows < y_floor, c] = BLACK
    return mask


def apply_junction_mask(occ, mask) -> np.ndarray:
    """Pixelwise AND of two occupancy masks."""
    occ = check_mask(occ)
    mask = check_mask(mask)
    if occ.shape != mask.shape:
        raise DimensionMismatch(f"mask {mask.shape} does not match occupancy {occ.shape}")
    return np.minimum(occ, mask)


def detect_junctions(img, params: JunctionParams | None = None):
    """Full junction chain on an RGB image; returns ``(edges, contours, lines, junctions, mask)``."""
    params = params or JunctionParams()
    gray = to_grayscale(img)
    edges = canny(gray, params.canny_low, params.canny_high)
    contours = trace_contours(edges)
    source = edges if params.hough_on_edges else contour_point_map(contours, edges.shape)
    lines = hough_lines(
        source,
        rho_res=params.rho_res,
        theta_res=params.theta_res,
        votes=params.votes,
        min_len=params.min_len,
        max_gap=params.max_gap,
        seed=params.seed,
    )
    found = find_floor_junctions(lines, params.radius, params.vertical_tol)
    mask = junction_mask(gray.shape, found, params.radius)
    return edges, contours, lines, found, mask


def draw_lines(img, lines, color=(255, 0, 0)) -> np.ndarray:
    from skimage.draw import line as _raster_line

    out = np.array(img, dtype=np.uint8, copy=True)
    if out.ndim == 2:
        out = np.repeat(out[..., None], 3, axis=2)
    h, w = out.shape[:2]
    for ln in lines:
        rr, cc = _raster_line(int(ln.p1[1]), int(ln.p1[0]), int(ln.p2[1]), int(ln.p2[0]))
        ok = (rr >= 0) & (rr < h) & (cc >= 0) & (cc < w)
        out[rr[ok], cc[ok]] = color
    return out
