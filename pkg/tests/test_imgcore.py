import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from skimage.color import rgb2lab

from mononav import imgcore
from mononav.errors import CorruptData, UnsupportedFormat


def write_ppm(path, arr):
    h, w = arr.shape[:2]
    path.write_bytes(b"P6\n%d %d\n255\n" % (w, h) + arr.astype(np.uint8).tobytes())


def test_load_black_ppm(tmp_path):
    p = tmp_path / "black.ppm"
    write_ppm(p, np.zeros((2, 2, 3)))
    img = imgcore.load_image(p)
    assert img.shape == (2, 2, 3)
    assert img.dtype == np.uint8
    assert img.tobytes() == bytes(12)


def test_load_single_red_pixel(tmp_path):
    p = tmp_path / "red.ppm"
    write_ppm(p, np.array([[[255, 0, 0]]]))
    assert imgcore.load_image(p).ravel().tolist() == [255, 0, 0]


def test_header_comment_is_skipped(tmp_path):
    p = tmp_path / "c.ppm"
    p.write_bytes(b"P6\n# made by hand\n1 1\n255\n" + bytes([1, 2, 3]))
    assert imgcore.load_image(p).ravel().tolist() == [1, 2, 3]


@pytest.mark.parametrize("data", [b"P6\n2 2", b"P6\n2", b"P6\n2 2\n255\n" + bytes(5), b"P6\nab 2\n255\n"])
def test_truncated_ppm_is_corrupt(tmp_path, data):
    p = tmp_path / "bad.ppm"
    p.write_bytes(data)
    with pytest.raises(CorruptData):
        imgcore.load_image(p)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        imgcore.load_image(tmp_path / "nope.png")


def test_unsupported_format(tmp_path):
    p = tmp_path / "x.jpg"
    p.write_bytes(b"\xff\xd8\xff\xe0 not really a jpeg")
    with pytest.raises(UnsupportedFormat):
        imgcore.load_image(p)
    ascii_ppm = tmp_path / "a.ppm"
    ascii_ppm.write_bytes(b"P3\n1 1\n255\n0 0 0\n")
    with pytest.raises(UnsupportedFormat):
        imgcore.load_image(ascii_ppm)


def test_corrupt_png(tmp_path):
    p = tmp_path / "x.png"
    p.write_bytes(b"\x89PNG\r\n\x1a\n" + b"garbage" * 4)
    with pytest.raises(CorruptData):
        imgcore.load_image(p)


def test_png_rgb_roundtrip(tmp_path):
    rng = np.random.default_rng(3)
    img = rng.integers(0, 256, (7, 5, 3), dtype=np.uint8)
    imgcore.save_image(img, tmp_path / "a.png")
    np.testing.assert_array_equal(imgcore.load_image(tmp_path / "a.png"), img)
    imgcore.save_image(img, tmp_path / "a.ppm")
    np.testing.assert_array_equal(imgcore.load_image(tmp_path / "a.ppm"), img)


@pytest.mark.parametrize("ext", [".pgm", ".png"])
def test_save_white_mask(tmp_path, ext):
    p = tmp_path / f"m{ext}"
    imgcore.save_mask(imgcore.new_mask(4, 4, imgcore.WHITE), p)
    back = imgcore.load_mask(p)
    assert back.shape == (4, 4)
    assert back.ravel().tolist() == [255] * 16


def test_pgm_layout(tmp_path):
    p = tmp_path / "m.pgm"
    imgcore.save_mask(imgcore.new_mask(4, 4, imgcore.WHITE), p)
    data = p.read_bytes()
    assert data.startswith(b"P5\n4 4\n255\n")
    assert data[-16:] == bytes([255] * 16)


def test_black_mask_roundtrip(tmp_path):
    p = tmp_path / "m.pgm"
    imgcore.save_mask(imgcore.new_mask(3, 6), p)
    assert not imgcore.load_mask(p).any()


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 12), st.integers(1, 12), st.integers(0, 2**31 - 1), st.sampled_from([".pgm", ".png"]))
def test_random_mask_roundtrip(tmp_path_factory, h, w, seed, ext):
    rng = np.random.default_rng(seed)
    mask = np.where(rng.random((h, w)) < 0.5, 255, 0).astype(np.uint8)
    p = tmp_path_factory.mktemp("m") / f"mask{ext}"
    imgcore.save_mask(mask, p)
    np.testing.assert_array_equal(imgcore.load_mask(p), mask)


def test_16bit_label_roundtrip(tmp_path):
    labels = np.arange(12, dtype=np.uint16).reshape(3, 4) * 5000
    imgcore.save_gray(labels, tmp_path / "l.pgm")
    np.testing.assert_array_equal(imgcore.load_gray(tmp_path / "l.pgm"), labels)


def test_mask_rejects_other_values():
    with pytest.raises(ValueError):
        imgcore.check_mask(np.array([[0, 7]], dtype=np.uint8))


def px(r, g, b):
    return np.array([[[r, g, b]]], dtype=np.uint8)


def test_lab_white():
    lab = imgcore.rgb_to_lab(px(255, 255, 255))[0, 0]
    assert abs(lab[0] - 100) <= 0.5
    assert abs(lab[1]) <= 0.5 and abs(lab[2]) <= 0.5


def test_lab_black():
    np.testing.assert_allclose(imgcore.rgb_to_lab(px(0, 0, 0))[0, 0], [0, 0, 0], atol=1e-12)


def test_lab_mid_gray_against_references():
    lab = imgcore.rgb_to_lab(px(119, 119, 119))[0, 0]
    # 116 * cbrt(srgb_decode(119 / 255)) - 16, evaluated with mpmath at 30 digits
    assert abs(lab[0] - 50.0344387925) <= 0.1
    assert abs(lab[0] - rgb2lab(px(119, 119, 119))[0, 0, 0]) <= 0.1


def test_lab_matches_skimage_on_random_colors():
    rng = np.random.default_rng(0)
    img = rng.integers(0, 256, (20, 20, 3), dtype=np.uint8)
    np.testing.assert_allclose(imgcore.rgb_to_lab(img), rgb2lab(img), atol=0.05)


def test_lab_gray_ramp_properties():
    grays = np.arange(256, dtype=np.uint8)
    img = np.repeat(grays[None, :, None], 3, axis=2)
    lab = imgcore.rgb_to_lab(img)[0]
    assert np.all(np.abs(lab[:, 1:]) <= 0.5)
    assert np.all(np.diff(lab[:, 0]) >= 0)
    assert np.all((lab[:, 0] >= 0) & (lab[:, 0] <= 100))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**31 - 1))
def test_lab_deterministic_and_shape_preserving(h, w, seed):
    img = np.random.default_rng(seed).integers(0, 256, (h, w, 3), dtype=np.uint8)
    a = imgcore.rgb_to_lab(img)
    assert a.shape == (h, w, 3)
    np.testing.assert_array_equal(a, imgcore.rgb_to_lab(img))
    assert np.all((a[..., 0] >= 0) & (a[..., 0] <= 100))
