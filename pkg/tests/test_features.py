import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from shapely.geometry import Point, Polygon

from mononav import features as F
from mononav.errors import DimensionMismatch, EmptyIntersection, UnknownLabel
from mononav.slic import SegmentLabels

from oracles import ray_walk


def test_mask_of_single_segment():
    lab = np.zeros((3, 5), dtype=np.int32)
    assert (F.superpixel_mask(lab, 0) == 255).all()


def test_mask_unknown_label():
    with pytest.raises(UnknownLabel):
        F.superpixel_mask(np.zeros((3, 3), dtype=np.int32), 1)
    with pytest.raises(UnknownLabel):
        F.superpixel_mask(np.zeros((3, 3), dtype=np.int32), -1)


def test_mask_count_matches_frequency():
    lab = np.random.default_rng(0).integers(0, 6, (20, 20))
    for k in range(6):
        m = F.superpixel_mask(lab, k)
        assert set(np.unique(m)) <= {0, 255}
        assert (m == 255).sum() == (lab == k).sum()


def test_full_image_segment_features():
    lab = np.zeros((7, 11), dtype=np.int32)
    (f,) = F.extract_features(lab, np.zeros((7, 11, 3)))
    assert (f.area, f.width, f.height) == (77, 11, 7)
    # center (5, 3): each diagonal runs 3 steps either way, 7 + 7 - 1
    assert f.diagonal == 13


def square_labels(size, canvas=50, top=20):
    lab = np.zeros((canvas, canvas), dtype=np.int32)
    lab[top : top + size, top : top + size] = 1
    return lab


def oracle_diagonal(lab, cx, cy):
    main = ray_walk(lab, cx, cy, 1, 1) + ray_walk(lab, cx, cy, -1, -1)
    anti = ray_walk(lab, cx, cy, 1, -1) + ray_walk(lab, cx, cy, -1, 1)
    return main + anti + 1


def test_even_square_features():
    lab = square_labels(10)
    f = F.extract_features(lab, np.zeros((50, 50, 3)))[1]
    assert (f.width, f.height, f.area) == (10, 10, 100)
    # mean 24.5 rounds to pixel 25: one diagonal spans all 10 pixels, the other only 9
    assert f.center == (25, 25)
    assert f.diagonal == oracle_diagonal(lab, 25, 25) == 18


def test_odd_square_features():
    lab = square_labels(11)
    f = F.extract_features(lab, np.zeros((50, 50, 3)))[1]
    assert (f.width, f.height) == (11, 11)
    assert f.diagonal == 21


def test_random_labels_match_ray_walk_oracle():
    rng = np.random.default_rng(4)
    for _ in range(10):
        lab = SegmentLabels.from_array(rng.integers(0, 4, (12, 15))).labels
        for f in F.extract_features(lab, np.zeros((12, 15, 3))):
            cx, cy = f.center
            assert lab[cy, cx] == f.label
            assert f.width == ray_walk(lab, cx, cy, 1, 0) + ray_walk(lab, cx, cy, -1, 0) + 1
            assert f.height == ray_walk(lab, cx, cy, 0, 1) + ray_walk(lab, cx, cy, 0, -1) + 1
            assert f.diagonal == oracle_diagonal(lab, cx, cy)


def test_concave_segment_center_falls_back_to_member():
    lab = np.zeros((9, 9), dtype=np.int32)
    lab[:, 0] = 1
    lab[0, :] = 1
    lab[:, 8] = 1  # a U shape whose mean sits outside it
    f = F.extract_features(lab, np.zeros((9, 9, 3)))[1]
    cx, cy = f.center
    assert lab[cy, cx] == 1


def test_uniform_color_features():
    img = np.full((20, 20, 3), [40.0, 5.0, -7.0])
    lab = np.random.default_rng(1).integers(0, 3, (20, 20))
    for f in F.extract_features(lab, img):
        assert (f.l, f.a, f.b) == (40.0, 5.0, -7.0)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        F.extract_features(np.zeros((4, 4), dtype=np.int32), np.zeros((4, 5, 3)))


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 16), st.integers(2, 16), st.integers(1, 6), st.integers(0, 2**31 - 1))
def test_feature_invariants(h, w, n, seed):
    lab = SegmentLabels.from_array(np.random.default_rng(seed).integers(0, n, (h, w)))
    feats = F.extract_features(lab, np.zeros((h, w, 3)))
    assert sum(f.area for f in feats) == h * w
    for f in feats:
        assert len(f.vector()) == 7
        assert min(f.area, f.width, f.height, f.diagonal) >= 1
    again = F.extract_features(lab, np.zeros((h, w, 3)))
    assert [f.vector().tolist() for f in again] == [f.vector().tolist() for f in feats]


def test_default_zone_vertices():
    z = F.SafeZone.default(640, 480)
    assert z.vertices == ((128.0, 475.2), (512.0, 475.2), (416.0, 360.0), (224.0, 360.0))
    cx, cy = z.centroid
    assert cx == pytest.approx(320)
    assert 360 < cy < 475.2


def test_zone_from_config(tmp_path):
    cfg = {"safe_zone": {"vertices": [[0.1, 0.9], [0.9, 0.9], [0.6, 0.5], [0.4, 0.5]], "relative": True}}
    p = tmp_path / "zone.json"
    p.write_text(json.dumps(cfg))
    z = F.SafeZone.from_config(p, 100, 200)
    assert z.vertices[0] == (10.0, 180.0)
    absolute = F.SafeZone.from_config({"vertices": [[1, 9], [9, 9], [6, 2], [4, 2]]}, 10, 10)
    assert absolute.vertices[2] == (6.0, 2.0)


def test_zone_rejects_bad_polygons():
    with pytest.raises(ValueError):
        F.SafeZone(((0, 0), (1, 1), (2, 2), (3, 3)))
    with pytest.raises(ValueError):
        F.SafeZone(((0, 0), (4, 4), (4, 0), (0, 4)))  # bow tie
    with pytest.raises(ValueError):
        F.SafeZone(((0, 0), (1, 0), (1, 1)))
    with pytest.raises(ValueError):
        F.SafeZone(((0, 0), (20, 0), (20, 5), (0, 5))).validate(10, 10)
    F.SafeZone(((0, 0), (10, 0), (10, 10), (0, 10))).validate(10, 10)


def shapely_inside(zone, h, w):
    poly = Polygon(zone.vertices)
    return np.array([[poly.intersects(Point(x, y)) for x in range(w)] for y in range(h)])


def test_zone_mask_matches_shapely():
    rng = np.random.default_rng(9)
    zones = [F.SafeZone.default(40, 30), F.SafeZone(((2, 25), (30, 25), (20, 5), (8, 5)))]
    for _ in range(8):
        xs = np.sort(rng.uniform(0, 39, 2))
        xt = np.sort(rng.uniform(0, 39, 2))
        yb, yt = rng.uniform(15, 29), rng.uniform(0, 14)
        zones.append(F.SafeZone(((xs[0], yb), (xs[1], yb), (xt[1], yt), (xt[0], yt))))
    for z in zones:
        np.testing.assert_array_equal(z.mask(30, 40), shapely_inside(z, 30, 40))


def test_zone_superpixels_match_brute_scan():
    rng = np.random.default_rng(2)
    z = F.SafeZone.default(40, 30)
    inside = shapely_inside(z, 30, 40)
    for _ in range(10):
        lab = rng.integers(0, 25, (30, 40))
        want = {int(lab[y, x]) for y in range(30) for x in range(40) if inside[y, x]}
        assert F.safe_zone_superpixels(lab, z) == want


def test_single_segment_and_tiny_zone():
    assert F.safe_zone_superpixels(np.zeros((10, 10), dtype=int), F.SafeZone.default(10, 10)) == {0}
    lab = np.arange(100).reshape(10, 10)
    tiny = F.SafeZone(((3.8, 6.2), (4.2, 6.2), (4.2, 5.8), (3.8, 5.8)))
    assert F.safe_zone_superpixels(lab, tiny) == {64}


def test_zone_superpixels_monotone():
    lab = np.random.default_rng(3).integers(0, 40, (30, 40))
    small = F.SafeZone(((15, 25), (25, 25), (22, 18), (18, 18)))
    big = F.SafeZone(((5, 29), (35, 29), (30, 10), (10, 10)))
    assert F.safe_zone_superpixels(lab, small) <= F.safe_zone_superpixels(lab, big)


def test_histogram_all_black():
    lab = np.zeros((10, 10), dtype=int)
    h = F.sample_safe_zone_histogram(np.zeros((10, 10, 3), np.uint8), lab, F.SafeZone.default(10, 10))
    for _, counts in h.channels():
        assert counts[0] == 100 and counts.sum() == 100


def test_histogram_whole_image_zone():
    rng = np.random.default_rng(0)
    img = rng.integers(0, 256, (12, 12, 3), dtype=np.uint8)
    lab = rng.integers(0, 9, (12, 12))
    zone = F.SafeZone(((0, 11), (11, 11), (11, 0), (0, 0)))
    h = F.sample_safe_zone_histogram(img, lab, zone)
    assert h.pixel_count == 144
    assert all(c.sum() == 144 for _, c in h.channels())
    np.testing.assert_array_equal(h.b, np.bincount(img[..., 2].ravel(), minlength=256))


def test_histogram_two_colors_counts():
    img = np.zeros((20, 20, 3), np.uint8)
    img[:, :10] = (10, 200, 30)
    img[:, 10:] = (250, 5, 90)
    lab = np.zeros((20, 20), dtype=int)
    lab[:, 10:] = 1
    lab[:5, :10] = 2
    zone = F.SafeZone(((2, 18), (7, 18), (6, 12), (3, 12)))
    h = F.sample_safe_zone_histogram(img, lab, zone)
    # whole segment 0 is sampled, not just the zone intersection
    n = int((lab == 0).sum())
    assert h.segment_ids == {0}
    assert (h.r[10], h.g[200], h.b[30]) == (n, n, n)
    assert h.r.sum() == n


def test_histogram_empty_intersection():
    # a labels array where every pixel inside the zone is missing is impossible,
    # so force it with a zone mask that catches no pixel centers
    zone = F.SafeZone(((1.1, 1.9), (1.9, 1.9), (1.9, 1.1), (1.1, 1.1)))
    with pytest.raises(EmptyIntersection):
        F.sample_safe_zone_histogram(np.zeros((4, 4, 3), np.uint8), np.zeros((4, 4), int), zone)


def test_histogram_csv(tmp_path):
    h = F.sample_safe_zone_histogram(np.zeros((4, 4, 3), np.uint8), np.zeros((4, 4), int), F.SafeZone.default(4, 4))
    p = tmp_path / "h.csv"
    h.to_csv(p)
    rows = p.read_text().splitlines()
    assert rows[0] == "channel,bin,count"
    assert len(rows) == 1 + 3 * 256
    assert rows[1] == "B,0,16"
