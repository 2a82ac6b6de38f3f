"""
Floor junctions
===============

Where a vertical edge (a box corner, a door frame) meets a near-horizontal
one, an obstacle stands on the floor. Everything above that horizontal line,
within a few pixels of the vertical, is marked non-traversable.

Run ``python demos/floor_junctions.py [out_dir]``.
"""

import sys
from pathlib import Path

import numpy as np

from mononav import imgcore, synth
from mononav import junctions as J
from mononav.preprocess import build_kernel, smooth

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demos/out")
out.mkdir(parents=True, exist_ok=True)

scene = synth.render_room(np.random.default_rng(11), n_boxes=2)
# a light blur keeps box edges sharp enough for the Canny thresholds
camera = np.clip(np.floor(smooth(scene.image, build_kernel(1.4)) + 0.5), 0, 255).astype(np.uint8)
params = J.JunctionParams()
edges, contours, lines, found, mask = J.detect_junctions(camera, params)

print(f"edge pixels: {int(edges.sum())}, contours: {len(contours)}, segments: {len(lines)}")
vertical = [ln for ln in lines if ln.orientation <= params.vertical_tol]
print(f"vertical segments: {len(vertical)}")
for fj in found:
    print(f"junction near {tuple(round(v, 1) for v in fj.anchor)}; floor line "
          f"{fj.floor_line.p1} -> {fj.floor_line.p2}")

# the mask is BLACK only in bands above floor lines
print(f"masked-out pixels: {int((mask == 0).sum())}")

imgcore.save_mask(np.where(edges, 255, 0).astype(np.uint8), out / "edges.png")
imgcore.save_image(J.draw_lines(scene.image, lines), out / "lines.png")
imgcore.save_mask(mask, out / "junction_mask.pgm")
