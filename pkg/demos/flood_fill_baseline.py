"""
Pixel flood fill as a baseline
==============================

The simplest floor finder fills outward from a seed pixel through pixels of
the same color. On a textured floor an exact match stops almost at once. A
color tolerance fixes that, but only a narrow band of tolerances works for a
given scene: too tight misses floor, too loose leaks onto walls and boxes.
The superpixel classifier needs no such knob, since it derives its threshold
from the safe zone.

Run ``python demos/flood_fill_baseline.py [out_dir]``.
"""

import sys
from pathlib import Path

import numpy as np

from mononav import floorseg, imgcore, pipeline, synth
from mononav.features import SafeZone

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demos/out")
out.mkdir(parents=True, exist_ok=True)

scene = synth.render_room(np.random.default_rng(5))
h, w = scene.floor.shape
cx, cy = SafeZone.default(w, h).centroid
seed = (int(round(cx)), int(round(cy)))


def score(mask):
    white = mask == 255
    return (white & scene.floor).sum() / scene.floor.sum(), (white & ~scene.floor).sum()


for tol in (0, 8, 16, 32, 64, 96):
    m = floorseg.flood_fill_mask(scene.image, seed, tol)
    r, leak = score(m)
    print(f"flood fill, tolerance {tol:2d}: recall {r:.3f}, non-floor pixels filled {leak}")
    imgcore.save_mask(m, out / f"floodfill_tol{tol}.pgm")

r, leak = score(pipeline.run_pipeline(scene.image).occupancy)
print(f"superpixel pipeline:        recall {r:.3f}, non-floor pixels filled {leak}")
