"""Floor / non-floor classification of superpixels and traversable-region growing."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import EmptyTrainingSet, NodeOutOfBounds, SeedNotFloor, SeedOutOfBounds
from .imgcore import BLACK, WHITE, check_rgb
from .slic import SegmentLabels

FLOOR = 1
NON_FLOOR = 0

SCALE_FLOOR = 1e-6


@dataclass(frozen=True)
class FloorModel:
    mean: np.ndarray
    scale: np.ndarray
    threshold: float

    def __post_init__(self):
        if np.any(self.scale <= 0):
            raise ValueError("feature scales must be positive")
        if self.threshold < 0:
            raise ValueError("threshold must be non-negative")


@dataclass(frozen=True)
class Seed:
    point: tuple


def _feature_matrix(features) -> np.ndarray:
    if len(features) == 0:
        return np.empty((0, 7))
    return np.stack([f.vector() for f in features])


def ssd_scores(features, model: FloorModel) -> np.ndarray:
    z = (_feature_matrix(features) - model.mean) / model.scale
    return np.sum(z * z, axis=1)


def normalized_ssd(f, model: FloorModel) -> float:
    """Sum over the 7 features of the squared deviation from the floor mean, in scale units."""
    z = (f.vector() - model.mean) / model.scale
    return float(np.sum(z * z))


def train_floor_model(features, training_ids, multiplier: float = 1.0, normalize: bool = True) -> FloorModel:
    """Fit mean/scale on the training superpixels and set the threshold.

    ``scale`` is the per-feature population standard deviation floored at 1e-6,
    or all ones with ``normalize=False``. The threshold is ``multiplier`` times
    the largest score among the training superpixels.
    """
    if multiplier < 1:
        raise ValueError(f"multiplier must be >= 1, got {multiplier}")
    train = [f for f in features if f.label in set(training_ids)]
    if not train:
        raise EmptyTrainingSet("no training superpixels")
    x = _feature_matrix(train)
    mean = x.mean(axis=0)
    if normalize:
        scale = np.maximum(x.std(axis=0), SCALE_FLOOR)
    else:
        scale = np.ones(7)
    provisional = FloorModel(mean=mean, scale=scale, threshold=0.0)
    threshold = multiplier * float(ssd_scores(train, provisional).max())
    return FloorModel(mean=mean, scale=scale, threshold=threshold)


def classify(features, model: FloorModel) -> dict:
    """Map each superpixel label to FLOOR (score <= threshold) or NON_FLOOR."""
    scores = ssd_scores(features, model)
    return {f.label: (FLOOR if s <= model.threshold else NON_FLOOR) for f, s in zip(features, scores)}


def superpixel_adjacency(labels) -> dict:
    """Map each label to the set of labels it touches through a 4-neighbor pixel pair."""
    lab = labels.labels if isinstance(labels, SegmentLabels) else np.asarray(labels)
    a = np.concatenate([lab[:, :-1].ravel(), lab[:-1, :].ravel()]).astype(np.int64)
    b = np.concatenate([lab[:, 1:].ravel(), lab[1:, :].ravel()]).astype(np.int64)
    diff = a != b
    a, b = a[diff], b[diff]
    n = int(lab.max()) + 1
    codes = np.unique(np.minimum(a, b) * n + np.maximum(a, b))
    adj = {int(v): set() for v in np.unique(lab)}
    for u, v in zip(*np.divmod(codes, n)):
        adj[int(u)].add(int(v))
        adj[int(v)].add(int(u))
    return adj


def adjacency_edges(adj: dict) -> set:
    return {(u, v) for u, vs in adj.items() for v in vs if u < v}


def default_seed(zone) -> Seed:
    return Seed(point=zone.centroid)


def region_grow(labels, features, model: FloorModel, seed: Seed) -> np.ndarray:
    """Breadth-first growth over superpixel adjacency from the seed's superpixel.

    A neighbor joins when its score is within the threshold. Neighbors are
    enqueued in ascending id order. Returns an occupancy mask.
    """
    lab = labels.labels if isinstance(labels, SegmentLabels) else np.asarray(labels)
    h, w = lab.shape
    x, y = seed.point
    # same continuous extent as safe zone vertices, snapped to the nearest pixel
    if not (0 <= x <= w and 0 <= y <= h):
        raise SeedOutOfBounds(f"seed {seed.point} is outside the {w}x{h} image")
    sx = min(int(np.floor(x + 0.5)), w - 1)
    sy = min(int(np.floor(y + 0.5)), h - 1)
    scores = dict(zip((f.label for f in features), ssd_scores(features, model)))
    start = int(lab[sy, sx])
    if scores.get(start, np.inf) > model.threshold:
        raise SeedNotFloor(
            f"seed superpixel {start} scores {scores.get(start)} above threshold {model.threshold}"
        )
    adj = superpixel_adjacency(lab)
    visited = {start}
    traversable = [start]
    queue = deque([start])
    while queue:
        sp = queue.popleft()
        for nbr in sorted(adj[sp]):
            if nbr in visited:
                continue
            if scores.get(nbr, np.inf) <= model.threshold:
                visited.add(nbr)
                traversable.append(nbr)
                queue.append(nbr)
    return np.where(np.isin(lab, traversable), WHITE, BLACK).astype(np.uint8)


def flood_fill(img, node, target, replacement) -> np.ndarray:
    """Recolor the 4-connected target-colored region containing ``node``.

    Uses an explicit FIFO queue. Returns a new image; the input is untouched.
    """
    img = check_rgb(img)
    h, w = img.shape[:2]
    x, y = node
    if not (0 <= x < w and 0 <= y < h):
        raise NodeOutOfBounds(f"node {node} is outside the {w}x{h} image")
    target = np.asarray(target, dtype=np.uint8)
    replacement = np.asarray(replacement, dtype=np.uint8)
    out = img.copy()
    if np.array_equal(target, replacement):
        return out
    if not np.array_equal(out[y, x], target):
        return out
    match = np.all(img == target, axis=2)
    queue = deque([(x, y)])
    match[y, x] = False
    while queue:
        cx, cy = queue.popleft()
        out[cy, cx] = replacement
        for nx, ny in ((cx, cy + 1), (cx, cy - 1), (cx - 1, cy), (cx + 1, cy)):
            if 0 <= nx < w and 0 <= ny < h and match[ny, nx]:
                match[ny, nx] = False
                queue.append((nx, ny))
    return out


def flood_fill_mask(img, node, tolerance: int = 0) -> np.ndarray:
    """Occupancy mask of the flood-fill region from ``node`` (the pixel-level baseline).

    ``tolerance`` widens the target color to a per-channel band around the
    node's color.
    """
    img = check_rgb(img)
    h, w = img.shape[:2]
    x, y = node
    if not (0 <= x < w and 0 <= y < h):
        raise NodeOutOfBounds(f"node {node} is outside the {w}x{h} image")
    ref = img[y, x].astype(np.int16)
    match = np.all(np.abs(img.astype(np.int16) - ref) <= tolerance, axis=2)
    # reuse the exact fill on a two-tone image of the matching set
    binary = np.where(match[..., None], 255, 0).astype(np.uint8).repeat(3, axis=2)
    filled = flood_fill(binary, node, (255, 255, 255), (1, 1, 1))
    return np.where(filled[..., 0] == 1, WHITE, BLACK).astype(np.uint8)
