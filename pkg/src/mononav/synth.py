"""Ray-cast synthetic indoor scenes and chessboards with exact ground truth.

Used by the test suite and the demos. World axes: X to the right, Y forward,
Z up; the floor is ``Z = 0``. The camera sits at height ``cam_height`` looking
along +Y, pitched down by ``pitch_deg``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .ipm import Homography


@dataclass(frozen=True)
class Camera:
    width: int = 640
    height: int = 480
    focal: float = 500.0
    cam_height: float = 40.0
    pitch_deg: float = 15.0

    def axes(self):
        t = math.radians(self.pitch_deg)
        right = np.array([1.0, 0.0, 0.0])
        down = np.array([0.0, -math.sin(t), -math.cos(t)])
        forward = np.array([0.0, math.cos(t), -math.sin(t)])
        return right, down, forward

    def rays(self) -> np.ndarray:
        """World-space direction of every pixel, shape ``(H, W, 3)``."""
        right, down, forward = self.axes()
        v, u = np.mgrid[0 : self.height, 0 : self.width].astype(np.float64)
        xc = (u - (self.width - 1) / 2.0) / self.focal
        yc = (v - (self.height - 1) / 2.0) / self.focal
        return xc[..., None] * right + yc[..., None] * down + forward

    @property
    def origin(self) -> np.ndarray:
        return np.array([0.0, 0.0, self.cam_height])

    def project(self, pts) -> np.ndarray:
        """World points ``(..., 3)`` to pixel coordinates ``(..., 2)``."""
        right, down, forward = self.axes()
        d = np.asarray(pts, dtype=np.float64) - self.origin
        z = d @ forward
        u = self.focal * (d @ right) / z + (self.width - 1) / 2.0
        v = self.focal * (d @ down) / z + (self.height - 1) / 2.0
        return np.stack([u, v], axis=-1)

    def ground_homography(self) -> Homography:
        """Homography taking floor coordinates ``(X, Y)`` to pixels."""
        right, down, forward = self.axes()
        k = np.array(
            [[self.focal, 0, (self.width - 1) / 2.0], [0, self.focal, (self.height - 1) / 2.0], [0, 0, 1]]
        )
        r = np.stack([right, down, forward])
        t = -r @ self.origin
        return Homography(k @ np.column_stack([r[:, 0], r[:, 1], t]))


@dataclass(frozen=True)
class Box:
    x0: float
    x1: float
    y0: float
    y1: float
    height: float
    color: tuple


@dataclass
class Scene:
    image: np.ndarray
    floor: np.ndarray  # True where the pixel sees the floor
    boxes: list = field(default_factory=list)
    camera: Camera = field(default_factory=Camera)


def _smooth_noise(rng, shape, scale):
    base = rng.standard_normal((max(2, shape[0] // scale + 2), max(2, shape[1] // scale + 2)))
    zoom = (shape[0] / (base.shape[0] - 1), shape[1] / (base.shape[1] - 1))
    up = ndimage.zoom(base, zoom, order=3)[: shape[0], : shape[1]]
    return up / (up.std() + 1e-12)


def _slab(origin, d, box: Box):
    """Ray/box intersection distance (inf if missed) and the hit face axis."""
    lo = np.array([box.x0, box.y0, 0.0])
    hi = np.array([box.x1, box.y1, box.height])
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / d
        t1 = (lo - origin) * inv
        t2 = (hi - origin) * inv
    tmin = np.minimum(t1, t2)
    tmax = np.maximum(t1, t2)
    tmin = np.where(np.isnan(tmin), -np.inf, tmin)
    tmax = np.where(np.isnan(tmax), np.inf, tmax)
    near = tmin.max(axis=-1)
    far = tmax.min(axis=-1)
    axis = tmin.argmax(axis=-1)
    hit = (near <= far) & (far > 0) & (near > 0)
    return np.where(hit, near, np.inf), axis


def render_room(
    rng=None,
    camera: Camera | None = None,
    n_boxes: int | None = None,
    floor_color=None,
    wall_color=None,
    texture: float = 0.07,
    sensor_noise: float = 3.0,
) -> Scene:
    """A floor, three walls and 1-3 boxes, with per-pixel floor ground truth.

    Boxes are kept out of the strip directly ahead of the camera.
    """
    rng = np.random.default_rng(rng)
    cam = camera or Camera()
    if n_boxes is None:
        n_boxes = int(rng.integers(1, 4))
    if floor_color is None:
        floor_color = np.array([170, 150, 120]) + rng.integers(-15, 16, 3)
    if wall_color is None:
        wall_color = np.array([120, 150, 185]) + rng.integers(-15, 16, 3)
    floor_color = np.asarray(floor_color, dtype=np.float64)
    wall_color = np.asarray(wall_color, dtype=np.float64)
    back = float(rng.uniform(420, 600))
    side = float(rng.uniform(220, 320))

    palette = [(200, 40, 40), (40, 150, 60), (40, 60, 170), (90, 50, 30), (210, 180, 30), (120, 40, 140)]
    order = rng.permutation(len(palette))
    boxes = []
    attempts = 0
    while len(boxes) < n_boxes and attempts < 200:
        attempts += 1
        wdt = rng.uniform(35, 70)
        dep = rng.uniform(30, 60)
        y0 = rng.uniform(130, back - dep - 40)
        x0 = rng.uniform(-side + 20, side - 20 - wdt)
        # keep the near corridor in front of the robot clear
        if y0 < 220 and x0 < 45 and x0 + wdt > -45:
            continue
        cand = Box(x0, x0 + wdt, y0, y0 + dep, rng.uniform(40, 90), palette[order[len(boxes)]])
        if any(cand.x0 < b.x1 + 15 and b.x0 < cand.x1 + 15 and cand.y0 < b.y1 + 15 and b.y0 < cand.y1 + 15 for b in boxes):
            continue
        boxes.append(cand)

    d = cam.rays()
    o = cam.origin
    h, w = cam.height, cam.width
    t_best = np.full((h, w), np.inf)
    kind = np.full((h, w), -1, dtype=np.int32)  # 0 floor, 1 back wall, 2 side walls, 10+i box i
    face = np.zeros((h, w), dtype=np.int32)

    with np.errstate(divide="ignore", invalid="ignore"):
        t_floor = np.where(d[..., 2] < 0, -o[2] / d[..., 2], np.inf)
        t_back = np.where(d[..., 1] > 0, (back - o[1]) / d[..., 1], np.inf)
        t_side = np.where(d[..., 0] > 0, (side - o[0]) / d[..., 0], np.where(d[..., 0] < 0, (-side - o[0]) / d[..., 0], np.inf))
    for t, k in ((t_floor, 0), (t_back, 1), (t_side, 2)):
        closer = t < t_best
        t_best[closer] = t[closer]
        kind[closer] = k
    for i, b in enumerate(boxes):
        t, ax = _slab(o, d, b)
        closer = t < t_best
        t_best[closer] = t[closer]
        kind[closer] = 10 + i
        face[closer] = ax[closer]

    hit = o + d * t_best[..., None]
    img = np.zeros((h, w, 3))
    floor = kind == 0
    tex = _smooth_noise(rng, (h, w), 24)
    # floor texture is attached to ground coordinates so it follows perspective
    gx, gy = hit[..., 0], hit[..., 1]
    ground_tex = (
        np.sin(gx / 9.0 + 1.3 * np.sin(gy / 23.0)) * np.cos(gy / 11.0 + 0.7 * np.sin(gx / 17.0))
    )
    img[floor] = floor_color * (1.0 + texture * (0.6 * ground_tex[floor] + 0.4 * tex[floor]))[:, None]
    walls = (kind == 1) | (kind == 2)
    shade = np.where(kind == 2, 0.85, 1.0)
    img[walls] = wall_color * (shade[walls] * (1.0 + 0.03 * tex[walls]))[:, None]
    for i, b in enumerate(boxes):
        sel = kind == 10 + i
        fshade = np.choose(face[sel], [0.8, 1.0, 1.15])
        img[sel] = np.asarray(b.color, dtype=np.float64) * fshade[:, None]
    img += rng.normal(0.0, sensor_noise, img.shape)
    img = np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8)
    return Scene(image=img, floor=floor, boxes=boxes, camera=cam)


def render_chessboard(
    h_ground_to_image: Homography,
    width: int,
    height: int,
    square: float = 5.0,
    squares: int = 8,
    origin=(0.0, 0.0),
    supersample: int = 8,
) -> np.ndarray:
    """Render a ``squares x squares`` board of ``square``-sized cells lying on the ground plane.

    Pixels are box-filtered over a ``supersample x supersample`` grid. Off-board
    ground is mid-gray.
    """
    inv = np.linalg.inv(h_ground_to_image.h)
    n = supersample
    offs = (np.arange(n) + 0.5) / n - 0.5
    acc = np.zeros((height, width))
    v, u = np.mgrid[0:height, 0:width].astype(np.float64)
    for oy in offs:
        for ox in offs:
            x, y = u + ox, v + oy
            wgt = inv[2, 0] * x + inv[2, 1] * y + inv[2, 2]
            gx = (inv[0, 0] * x + inv[0, 1] * y + inv[0, 2]) / wgt - origin[0]
            gy = (inv[1, 0] * x + inv[1, 1] * y + inv[1, 2]) / wgt - origin[1]
            cx, cy = np.floor(gx / square), np.floor(gy / square)
            on = (cx >= 0) & (cx < squares) & (cy >= 0) & (cy < squares) & (wgt > 0)
            val = np.where((cx + cy) % 2 == 0, 230.0, 25.0)
            acc += np.where(on, val, 128.0)
    gray = np.clip(np.floor(acc / (n * n) + 0.5), 0, 255).astype(np.uint8)
    return np.repeat(gray[..., None], 3, axis=2)


def chessboard_corners(square: float = 5.0, squares: int = 8, origin=(0.0, 0.0)) -> np.ndarray:
    """Ground coordinates of all ``(squares + 1)^2`` grid corners, row-major in Y then X."""
    idx = np.arange(squares + 1) * square
    gy, gx = np.meshgrid(idx + origin[1], idx + origin[0], indexing="ij")
    return np.stack([gx.ravel(), gy.ravel()], axis=1)
