"""Image arrays, raster I/O and sRGB -> CIELAB conversion.

Images are plain numpy arrays:

* RGB image: ``(H, W, 3)`` ``uint8``, channels in R, G, B order.
* Lab image: ``(H, W, 3)`` ``float64`` holding L in [0, 100] and a, b.
* occupancy mask: ``(H, W)`` ``uint8`` holding only ``BLACK`` (0) and ``WHITE`` (255).

Only PNG and binary netpbm (P5/P6) files are read or written.
"""

from __future__ import annotations

import io
import os
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import CorruptData, DimensionMismatch, UnsupportedFormat

BLACK = 0
WHITE = 255

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"

# sRGB primaries, D65 white
_XYZ_FROM_RGB = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
D65_WHITE = np.array([0.95047, 1.0, 1.08883])
_LAB_EPS = (6.0 / 29.0) ** 3


def check_rgb(img) -> np.ndarray:
    """Validate and return an RGB ``uint8`` image array."""
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise DimensionMismatch(f"expected an (H, W, 3) image, got shape {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise DimensionMismatch("image must be at least 1x1")
    if img.dtype != np.uint8:
        raise TypeError(f"expected uint8 samples, got {img.dtype}")
    return img


def check_mask(mask) -> np.ndarray:
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise DimensionMismatch(f"expected an (H, W) mask, got shape {mask.shape}")
    if mask.dtype != np.uint8:
        raise TypeError(f"mask must be uint8, got {mask.dtype}")
    if not np.all((mask == BLACK) | (mask == WHITE)):
        raise ValueError("mask may only contain 0 and 255")
    return mask


def new_mask(height: int, width: int, value: int = BLACK) -> np.ndarray:
    return np.full((height, width), value, dtype=np.uint8)


# --------------------------------------------------------------------- netpbm


def _read_pnm(data: bytes) -> np.ndarray:
    magic = data[:2]
    if magic not in (b"P5", b"P6"):
        raise UnsupportedFormat(f"unsupported netpbm variant {magic!r}")
    fields = []
    pos = 2
    n = len(data)
    while len(fields) < 3:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos < n and data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and data[pos : pos + 1].isdigit():
            pos += 1
        if start == pos:
            raise CorruptData("truncated or malformed netpbm header")
        fields.append(int(data[start:pos]))
    # exactly one whitespace byte separates header from raster
    if pos >= n or not data[pos : pos + 1].isspace():
        raise CorruptData("truncated or malformed netpbm header")
    pos += 1
    width, height, maxval = fields
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise CorruptData(f"invalid netpbm header values {fields}")
    channels = 3 if magic == b"P6" else 1
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
    expected = width * height * channels * dtype.itemsize
    raster = data[pos : pos + expected]
    if len(raster) < expected:
        raise CorruptData(f"raster truncated: expected {expected} bytes, got {len(raster)}")
    arr = np.frombuffer(raster, dtype=dtype).reshape(height, width, channels)
    if maxval > 255:
        arr = arr.astype(np.uint16)
    elif maxval != 255:
        arr = np.round(arr.astype(np.float64) * (255.0 / maxval)).astype(np.uint8)
    return arr


def _write_pnm(path, arr: np.ndarray) -> None:
    if arr.ndim == 2:
        magic, channels = b"P5", 1
    else:
        magic, channels = b"P6", arr.shape[2]
        if channels != 3:
            raise DimensionMismatch("P6 output needs three channels")
    height, width = arr.shape[:2]
    if arr.dtype == np.uint16:
        maxval, raster = 65535, arr.astype(">u2").tobytes()
    else:
        maxval, raster = 255, np.ascontiguousarray(arr, dtype=np.uint8).tobytes()
    header = b"%s\n%d %d\n%d\n" % (magic, width, height, maxval)
    with open(path, "wb") as fh:
        fh.write(header + raster)


# ---------------------------------------------------------------------- files


def _read_raster(path) -> np.ndarray:
    """Decode a PNG or netpbm file into ``(H, W, C)`` samples."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such image file: {path}")
    data = path.read_bytes()
    if data[:2] in (b"P5", b"P6"):
        return _read_pnm(data)
    if data[:1] == b"P" and data[1:2] in (b"1", b"2", b"3", b"4", b"7"):
        raise UnsupportedFormat(f"only binary P5/P6 netpbm files are supported: {path}")
    if data[:8] != _PNG_MAGIC:
        raise UnsupportedFormat(f"{path} is neither PNG nor binary PPM/PGM")
    try:
        with Image.open(io.BytesIO(data)) as im:
            im.load()
            if im.mode in ("I;16", "I;16B", "I"):
                arr = np.asarray(im).astype(np.uint16)[:, :, None]
            elif im.mode in ("L", "1", "LA"):
                arr = np.asarray(im.convert("L"))[:, :, None]
            else:
                arr = np.asarray(im.convert("RGB"))
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise CorruptData(f"could not decode PNG {path}: {exc}") from exc
    return arr


def load_image(path) -> np.ndarray:
    """Load an RGB image from a PNG or binary PPM/PGM file.

    Gray files are replicated into three channels.
    """
    arr = _read_raster(path)
    if arr.dtype != np.uint8:
        raise UnsupportedFormat(f"{path}: only 8-bit images can be loaded as RGB")
    if arr.shape[2] == 1:
        arr = np.repeat(arr, 3, axis=2)
    return np.ascontiguousarray(arr)


def load_gray(path) -> np.ndarray:
    """Load a single-channel raster (8- or 16-bit)."""
    arr = _read_raster(path)
    if arr.shape[2] != 1:
        raise UnsupportedFormat(f"{path} is not a single-channel image")
    return np.ascontiguousarray(arr[:, :, 0])


def load_mask(path) -> np.ndarray:
    return check_mask(load_gray(path))


def _kind(path) -> str:
    ext = os.path.splitext(str(path))[1].lower()
    if ext in (".pgm", ".ppm", ".pnm"):
        return "pnm"
    if ext == ".png":
        return "png"
    raise UnsupportedFormat(f"cannot infer output format from {path!r}; use .png, .pgm or .ppm")


def save_image(img: np.ndarray, path) -> None:
    """Write an RGB image as PNG or P6."""
    img = check_rgb(img)
    if _kind(path) == "pnm":
        _write_pnm(path, img)
    else:
        Image.fromarray(img, mode="RGB").save(path, format="PNG")


def save_gray(arr: np.ndarray, path) -> None:
    """Write a single-channel 8- or 16-bit raster as PGM or PNG."""
    arr = np.asarray(arr)
    if arr.ndim != 2 or arr.dtype not in (np.uint8, np.uint16):
        raise TypeError("expected a 2-D uint8 or uint16 array")
    if _kind(path) == "pnm":
        _write_pnm(path, arr)
    elif arr.dtype == np.uint16:
        Image.fromarray(arr.astype("<u2"), mode="I;16").save(path, format="PNG")
    else:
        Image.fromarray(arr, mode="L").save(path, format="PNG")


def save_mask(mask: np.ndarray, path) -> None:
    """Write an occupancy mask as single-channel PGM (P5) or PNG."""
    save_gray(check_mask(mask), path)


# ---------------------------------------------------------------------- color


def srgb_to_linear(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=np.float64)
    return np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)


def _lab_f(t: np.ndarray) -> np.ndarray:
    return np.where(t > _LAB_EPS, np.cbrt(t), t / (3.0 * (6.0 / 29.0) ** 2) + 4.0 / 29.0)


def rgb_to_lab(img) -> np.ndarray:
    """Convert an 8-bit sRGB image to CIE L*a*b* under the D65 white point."""
    img = check_rgb(img)
    linear = srgb_to_linear(img / 255.0)
    xyz = linear @ _XYZ_FROM_RGB.T
    f = _lab_f(xyz / D65_WHITE)
    lab = np.empty_like(f)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    np.clip(lab[..., 0], 0.0, 100.0, out=lab[..., 0])
    return lab
