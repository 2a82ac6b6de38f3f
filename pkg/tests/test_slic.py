import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mononav import slic
from mononav.errors import EmptyImage, InvalidK, OutOfBounds

from oracles import brute_assign, brute_means, components4


def test_grid_interval_values():
    assert slic.grid_interval(307200, 200) == pytest.approx(39.191835884530846, abs=1e-12)
    assert slic.grid_interval(100, 100) == 1.0
    assert slic.grid_interval(400, 4) == 10.0


@pytest.mark.parametrize("k", [0, 101, -3])
def test_grid_interval_rejects_bad_k(k):
    with pytest.raises(InvalidK):
        slic.grid_interval(100, k)


def test_slic_distance_values():
    p = [1, 2, 3, 4, 5]
    assert slic.slic_distance(p, p, 10, 10) == 0
    assert slic.slic_distance([0, 0, 0, 0, 0], [0, 0, 0, 3, 4], 10, 10) == 5
    assert slic.slic_distance([10, 0, 0, 2, 2], [0, 0, 0, 2, 2], 10, 10) == 10


def test_gradient_values():
    assert slic.image_gradient(np.full((5, 5, 3), 7.0), 2, 2) == 0
    ramp = np.repeat(np.tile(np.arange(6.0), (6, 1))[..., None], 3, axis=2)
    assert slic.image_gradient(ramp, 3, 3) == 12
    step = np.zeros((6, 6, 3))
    step[3:, :, 0] = 10
    # at row 3 the vertical difference spans the step once
    assert slic.image_gradient(step, 2, 3) == 100
    assert slic.image_gradient(step, 2, 2) == 100


def test_gradient_border_raises():
    img = np.zeros((5, 5, 3))
    for x, y in [(0, 2), (4, 2), (2, 0), (2, 4)]:
        with pytest.raises(OutOfBounds):
            slic.image_gradient(img, x, y)


def test_gradient_map_matches_pointwise():
    img = np.random.default_rng(2).random((7, 9, 3))
    g = slic.gradient_map(img)
    for y in range(1, 6):
        for x in range(1, 8):
            assert g[y, x] == pytest.approx(slic.image_gradient(img, x, y), rel=1e-12)
    assert np.isinf(g[0]).all() and np.isinf(g[:, -1]).all()


def test_params_validation():
    with pytest.raises(InvalidK):
        slic.SlicParams(k=0)
    with pytest.raises(ValueError):
        slic.SlicParams(m=0)
    with pytest.raises(ValueError):
        slic.SlicParams(color_space="hsv")


def test_empty_image():
    with pytest.raises(EmptyImage):
        slic.segment(np.zeros((0, 4, 3)))


def test_k_larger_than_image():
    with pytest.raises(InvalidK):
        slic.segment(np.zeros((4, 4, 3)), slic.SlicParams(k=17))


def test_single_cluster():
    img = np.random.default_rng(0).random((30, 40, 3))
    seg = slic.segment(img, slic.SlicParams(k=1))
    assert seg.segment_count == 1
    assert not seg.labels.any()


def test_uniform_image_forms_two_by_two_grid():
    seg = slic.segment(np.full((100, 100, 3), 50.0), slic.SlicParams(k=4))
    assert seg.segment_count == 4
    assert np.all(np.abs(seg.sizes - 2500) <= 500)
    for lab in range(4):
        assert len(components4(seg.labels == lab)) == 1
    # quadrant ownership
    quads = [seg.labels[:50, :50], seg.labels[:50, 50:], seg.labels[50:, :50], seg.labels[50:, 50:]]
    majority = [np.bincount(q.ravel()).argmax() for q in quads]
    assert len(set(majority)) == 4


def quadrant_image(n=32):
    img = np.zeros((n, n, 3))
    h = n // 2
    img[:h, :h] = (80, 10, 10)
    img[:h, h:] = (20, 70, 20)
    img[h:, :h] = (30, 30, 90)
    img[h:, h:] = (60, 60, 5)
    return img


def test_quadrant_boundaries_recovered():
    img = quadrant_image()
    seg = slic.segment(img, slic.SlicParams(k=4, m=10))
    assert seg.segment_count == 4
    edges = slic.boundaries(seg.labels)
    ys, xs = np.nonzero(edges)
    # every boundary pixel lies within 2 px of the true cross at 15.5
    assert np.all(np.minimum(np.abs(xs - 15.5), np.abs(ys - 15.5)) <= 2)


def test_quadrant_assignment_matches_exhaustive_oracle():
    img = quadrant_image()
    s = slic.grid_interval(32 * 32, 4)
    centers = slic.seed_centers(img, s)
    labels, _ = slic.assign_pixels(img, centers, 10, s)
    np.testing.assert_array_equal(labels, brute_assign(img, centers, 10, s))


def test_assignment_and_update_match_brute_force():
    rng = np.random.default_rng(7)
    for trial in range(20):
        img = rng.random((16, 16, 3)) * 100
        k = int(rng.integers(2, 12))
        m = float(rng.uniform(1, 40))
        s = slic.grid_interval(256, k)
        centers = slic.seed_centers(img, s)
        labels, _ = slic.assign_pixels(img, centers, m, s)
        want = brute_assign(img, centers, m, s)
        np.testing.assert_array_equal(labels, want)
        np.testing.assert_allclose(slic.update_centers(img, labels, centers), brute_means(img, want, centers), rtol=1e-12)


def test_empty_cluster_keeps_center():
    img = np.zeros((4, 4, 3))
    centers = np.array([[0, 0, 0, 1.0, 1.0], [0, 0, 0, 2.5, 2.5]])
    labels = np.zeros((4, 4), dtype=np.int32)
    new = slic.update_centers(img, labels, centers)
    np.testing.assert_array_equal(new[1], centers[1])
    np.testing.assert_allclose(new[0], [0, 0, 0, 1.5, 1.5])


def test_seeds_follow_lowest_gradient():
    img = np.zeros((30, 30, 3))
    img[15:, :, 0] = 50  # step edge straddling the natural seed row
    s = slic.grid_interval(900, 1)
    c = slic.seed_centers(img, s)
    assert c.shape == (1, 5)
    # rows 14 and 15 both see the step; row 16 is flat and the first flat offset scanned is dx=-1
    assert (c[0, 3], c[0, 4]) == (14, 16)
    assert c[0, 0] == 50


def test_connectivity_absorbs_fragments():
    labels = np.zeros((10, 10), dtype=np.int32)
    labels[:, 5:] = 1
    labels[2, 2] = 1  # stray pixel of cluster 1 inside cluster 0
    labels[7, 8] = 0
    out, n = slic.enforce_connectivity(labels, 4)
    assert n == 2
    assert out[2, 2] == out[0, 0]
    assert out[7, 8] == out[0, 9]


def test_connectivity_handles_unassigned():
    labels = np.zeros((6, 6), dtype=np.int32)
    labels[:, 3:] = 1
    labels[0, 0] = -1
    out, n = slic.enforce_connectivity(labels, 2)
    assert n == 2 and out[0, 0] == out[1, 1]


def check_partition(seg, shape):
    lab = seg.labels
    assert lab.shape == shape
    assert lab.min() >= 0 and lab.max() == seg.segment_count - 1
    assert len(np.unique(lab)) == seg.segment_count
    for k, comp_count in enumerate(np.bincount(lab.ravel())):
        assert comp_count > 0


@settings(max_examples=25, deadline=None)
@given(st.integers(8, 40), st.integers(8, 40), st.integers(1, 30), st.floats(1, 40), st.integers(0, 2**31 - 1))
def test_segment_partition_properties(h, w, k, m, seed):
    img = np.random.default_rng(seed).random((h, w, 3)) * 100
    seg = slic.segment(img, slic.SlicParams(k=min(k, h * w), m=m, iterations=4))
    check_partition(seg, (h, w))
    for lab in range(seg.segment_count):
        assert len(components4(seg.labels == lab)) == 1
    # each pixel is compared with at most nine windows per iteration
    assert seg.stats.comparisons.max() <= 9 * seg.stats.iterations_run
    np.testing.assert_array_equal(seg.labels, slic.segment(img, slic.SlicParams(k=min(k, h * w), m=m, iterations=4)).labels)


def test_early_exit_on_converged_input():
    seg = slic.segment(np.full((40, 40, 3), 10.0), slic.SlicParams(k=16, iterations=10))
    assert seg.stats.iterations_run < 10


def test_from_array_renumbers():
    seg = slic.SegmentLabels.from_array(np.array([[5, 5, 9], [2, 2, 9]]))
    assert seg.segment_count == 3
    np.testing.assert_array_equal(seg.labels, [[1, 1, 2], [0, 0, 2]])
    np.testing.assert_array_equal(seg.sizes, [2, 2, 2])


def test_boundary_overlay_marks_edges():
    lab = np.zeros((4, 4), dtype=np.int32)
    lab[:, 2:] = 1
    out = slic.boundary_overlay(np.zeros((4, 4, 3), np.uint8), lab)
    assert (out[:, 1] == (255, 255, 0)).all() and not out[:, 0].any()
