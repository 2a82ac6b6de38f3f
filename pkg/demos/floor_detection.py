"""
Floor detection on a synthetic room
===================================

A camera looks at a textured floor with a few boxes and three walls. The
pipeline learns what floor looks like from a trapezoid just ahead of the
camera, grows that floor through the superpixel graph, and blacks out
anything above the foot of a wall or box.

Run ``python demos/floor_detection.py [out_dir]``.
"""

import sys
from pathlib import Path

import numpy as np

from mononav import imgcore, pipeline, synth

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demos/out")
out.mkdir(parents=True, exist_ok=True)

# a scene with known per-pixel floor truth
scene = synth.render_room(np.random.default_rng(7))
imgcore.save_image(scene.image, out / "room.png")

res = pipeline.run_pipeline(scene.image)

# how much of the real floor came back WHITE, and how clean the BLACK part is
white = res.occupancy == 255
recall = (white & scene.floor).sum() / scene.floor.sum()
precision = (~white & ~scene.floor).sum() / max(1, (~white).sum())
print(f"superpixels: {res.labels.segment_count}")
print(f"training superpixels in the safe zone: {len(res.training_ids)}")
print(f"SSD threshold: {res.model.threshold:.2f}")
print(f"floor recall {recall:.3f}, obstacle precision {precision:.3f}")

# junction masking can only remove WHITE pixels
assert np.all(res.region[white] == 255)
print(f"floor junctions found: {len(res.floor_junctions)}")

for stage, t in res.timings.items():
    print(f"  {stage:12s} {1000 * t:7.1f} ms")
print(f"  {'total':12s} {1000 * res.total_time:7.1f} ms")

imgcore.save_mask(res.occupancy, out / "occupancy.pgm")
imgcore.save_image(pipeline.diagnostic_overlay(scene.image, res.labels, res.zone, res.seed), out / "overlay.png")
