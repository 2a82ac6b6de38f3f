"""Separable Gaussian smoothing."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import EmptyImage, InvalidSigma

DEFAULT_SIGMA = 5.0


@dataclass(frozen=True)
class GaussianKernel:
    sigma: float
    radius: int
    weights: np.ndarray

    @property
    def size(self) -> int:
        return 2 * self.radius + 1


def build_kernel(sigma: float) -> GaussianKernel:
    """Sampled normal density truncated at ``ceil(3 sigma)`` and renormalized to sum 1."""
    sigma = float(sigma)
    if not sigma > 0 or not math.isfinite(sigma):
        raise InvalidSigma(f"sigma must be a positive finite number, got {sigma}")
    radius = int(math.ceil(3.0 * sigma))
    t = np.arange(-radius, radius + 1, dtype=np.float64)
    w = np.exp(-(t**2) / (2.0 * sigma**2)) / (sigma * math.sqrt(2.0 * math.pi))
    w /= w.sum()
    # enforce exact symmetry against rounding in the sum
    w = 0.5 * (w + w[::-1])
    w.flags.writeable = False
    return GaussianKernel(sigma=sigma, radius=radius, weights=w)


def smooth(img, kernel: GaussianKernel | float) -> np.ndarray:
    """Blur each channel with a horizontal then a vertical 1-D pass.

    Borders are reflected without repeating the edge sample (``dcb|abcd|cba``).
    Accepts ``(H, W)`` or ``(H, W, C)`` arrays and returns ``float64`` of the same shape.
    """
    if not isinstance(kernel, GaussianKernel):
        kernel = build_kernel(kernel)
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim not in (2, 3) or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise EmptyImage(f"cannot smooth an array of shape {arr.shape}")
    w = kernel.weights
    if arr.shape[0] == 1 and arr.shape[1] == 1:
        return arr.copy()
    out = arr
    # 'mirror' in scipy is reflect-101; a length-1 axis is left alone
    if arr.shape[1] > 1:
        out = ndimage.correlate1d(out, w, axis=1, mode="mirror")
    if arr.shape[0] > 1:
        out = ndimage.correlate1d(out, w, axis=0, mode="mirror")
    return out
