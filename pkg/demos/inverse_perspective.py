"""
Inverse perspective mapping
===========================

Four image points with known ground coordinates pin down the floor plane's
homography. With it, any floor pixel maps to centimeters on the ground, and
the image can be resampled into a top-down view.

The chessboard is rendered through a known camera, so the true ground
position of every corner is available to score the estimate.

Run ``python demos/inverse_perspective.py [out_dir]``.
"""

import sys
from pathlib import Path

import numpy as np
from skimage.feature import corner_subpix

from mononav import imgcore, ipm, synth

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demos/out")
out.mkdir(parents=True, exist_ok=True)

square, origin = 5.0, (-20.0, 60.0)
cam = synth.Camera()
h_true = cam.ground_homography()  # ground -> image
board = synth.render_chessboard(h_true, cam.width, cam.height, square, 8, origin, supersample=8)
imgcore.save_image(board, out / "chessboard.png")

# inner corners, located to subpixel accuracy near their projected positions
ground = synth.chessboard_corners(square, 8, origin)
x0, y0 = origin
inner = ground[(ground[:, 0] > x0) & (ground[:, 0] < x0 + 40) & (ground[:, 1] > y0) & (ground[:, 1] < y0 + 40)]
px, py, _ = ipm.apply_homography_array(h_true, inner[:, 0], inner[:, 1])
sp = corner_subpix(board[..., 0].astype(float), np.c_[np.round(py), np.round(px)].astype(int), window_size=11)
pix = np.c_[sp[:, 1], sp[:, 0]]

# calibrate on the four outermost inner corners, test on the other 45
lo, hi = inner.min(axis=0), inner.max(axis=0)
pick = [int(np.flatnonzero((inner == p).all(axis=1))[0]) for p in [(lo[0], lo[1]), (hi[0], lo[1]), (hi[0], hi[1]), (lo[0], hi[1])]]
rest = [i for i in range(len(inner)) if i not in pick]
pc = ipm.PointCorrespondence
h = ipm.estimate_homography([pc(tuple(pix[i]), tuple(inner[i])) for i in pick])
held = [pc(tuple(pix[i]), tuple(inner[i])) for i in rest]
err = np.array([np.hypot(*np.subtract(ipm.apply_homography(h, c.image_point), c.ground_point)) for c in held])
print(f"held-out corners: mean error {err.mean():.3f} cm, max {err.max():.3f} cm "
      f"({err.max() / square:.2%} of a square)")
print(f"sum of squared reprojection errors: {ipm.reprojection_error(h, held):.4f} cm^2")

# a lookup table answers the same question without any arithmetic at run time
lut = ipm.build_lookup_table(h, (0, 240, cam.width, 240))
print(f"pixel (320, 400) is at ground {tuple(round(v, 2) for v in lut.lookup(320, 400))} cm")
lut.save_binary(out / "lut.bin")

# resample the board region to a square top-down view
far, near = y0 + 40, y0
roi = np.array([(x0, far), (x0 + 40, far), (x0 + 40, near), (x0, near)])
qx, qy, _ = ipm.apply_homography_array(h_true, roi[:, 0], roi[:, 1])
top, _ = ipm.warp_topdown(board, list(zip(qx, qy)), 320, 320)
imgcore.save_image(top, out / "topdown.png")
