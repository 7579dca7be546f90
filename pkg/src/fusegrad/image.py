"""Image containers, YCrCb conversion, bilinear resampling and PNG I/O.

A gray plane is a 2-D float64 ``numpy`` array with values in [0, 1]; an RGB
image is an ``(H, W, 3)`` array.  Chroma planes of :class:`YCrCb` are stored
offset so that 0.5 is neutral.
"""
from __future__ import annotations

import math
import os
from typing import NamedTuple

import numpy as np

from . import kernels

MIN_SIDE = 3

# full-range BT.601
_KR, _KG, _KB = 0.299, 0.587, 0.114
_CR_DIV = 2.0 * (1.0 - _KR)  # 1.402
_CB_DIV = 2.0 * (1.0 - _KB)  # 1.772


class YCrCb(NamedTuple):
    y: np.ndarray
    cr: np.ndarray
    cb: np.ndarray


def check_plane(img, name="image", min_side=MIN_SIDE) -> np.ndarray:
    """Coerce ``img`` to a float64 plane and validate shape and finiteness."""
    a = np.asarray(img, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"{name} must be a 2-D plane, got shape {a.shape}")
    if a.shape[0] < min_side or a.shape[1] < min_side:
        raise ValueError(f"{name} must be at least {min_side}x{min_side}, got {a.shape[0]}x{a.shape[1]}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite values")
    return a


def check_same_shape(**planes) -> None:
    shapes = {k: np.shape(v) for k, v in planes.items()}
    if len(set(shapes.values())) > 1:
        desc = ", ".join(f"{k}={s}" for k, s in shapes.items())
        raise ValueError(f"dimension mismatch: {desc}")


def clamp01(img) -> np.ndarray:
    return np.clip(img, 0.0, 1.0)


def rgb_to_ycrcb(img) -> YCrCb:
    rgb = np.asarray(img, dtype=np.float64)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) RGB image, got shape {rgb.shape}")
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    y = _KR * r + _KG * g + _KB * b
    cr = 0.5 + (r - y) / _CR_DIV
    cb = 0.5 + (b - y) / _CB_DIV
    return YCrCb(clamp01(y), clamp01(cr), clamp01(cb))


def ycrcb_to_rgb(img: YCrCb) -> np.ndarray:
    y, cr, cb = (np.asarray(p, dtype=np.float64) for p in img)
    check_same_shape(y=y, cr=cr, cb=cb)
    r = y + _CR_DIV * (cr - 0.5)
    b = y + _CB_DIV * (cb - 0.5)
    g = (y - _KR * r - _KB * b) / _KG
    return clamp01(np.stack([r, g, b], axis=-1))


def to_gray(img) -> np.ndarray:
    """Return the Y plane of an RGB image, or the plane itself."""
    a = np.asarray(img, dtype=np.float64)
    if a.ndim == 3:
        return rgb_to_ycrcb(a).y
    return a


def scaled_shape(shape, scale: float) -> tuple[int, int]:
    """Output size of :func:`resize_bilinear`; raises if an axis drops below 3."""
    if not (0.0 < scale <= 1.0):
        raise ValueError(f"scale must be in (0, 1], got {scale}")
    out = tuple(int(math.floor(scale * n + 0.5)) for n in shape)
    if min(out) < MIN_SIDE:
        raise ValueError(
            f"scale {scale} maps {shape[0]}x{shape[1]} to {out[0]}x{out[1]}; "
            f"each axis must stay >= {MIN_SIDE}"
        )
    return out


def resize_bilinear(img, scale: float) -> np.ndarray:
    """Bilinear downsampling with half-pixel centers and clamped borders.

    Output pixel ``i`` samples the input at ``(i + 0.5) / scale - 0.5``.
    """
    a = check_plane(img)
    if scale == 1.0:
        return a.copy()
    oh, ow = scaled_shape(a.shape, scale)
    return kernels.resize(a, oh, ow, scale)


def resize_bilinear_adjoint(g, in_shape, scale: float) -> np.ndarray:
    """Transpose of :func:`resize_bilinear` for an input of ``in_shape``."""
    g = np.asarray(g, dtype=np.float64)
    if scale == 1.0:
        return g.copy()
    expected = scaled_shape(in_shape, scale)
    if g.shape != expected:
        raise ValueError(f"adjoint input has shape {g.shape}, expected {expected}")
    return kernels.resize_adjoint(g, in_shape[0], in_shape[1], scale)


class ImageIOError(OSError):
    """Raised when an image cannot be read or written."""

    def __init__(self, path, cause):
        self.path = os.fspath(path)
        self.cause = cause
        super().__init__(f"{self.path}: {cause}")


def load_image(path) -> np.ndarray:
    """Load an 8-bit PNG as a gray plane (H, W) or an RGB image (H, W, 3)."""
    from PIL import Image, UnidentifiedImageError

    try:
        with Image.open(path) as im:
            im.load()
            fmt, mode = im.format, im.mode
            if fmt != "PNG":
                raise ImageIOError(path, f"unsupported format {fmt!r}; only PNG is accepted")
            if mode in ("L", "LA"):
                arr = np.asarray(im.convert("L"))
            elif mode in ("RGB", "RGBA", "P"):
                arr = np.asarray(im.convert("RGB"))
            else:
                raise ImageIOError(path, f"unsupported bit depth or mode {mode!r}; expected 8-bit gray or RGB")
    except FileNotFoundError:
        raise ImageIOError(path, "file not found") from None
    except UnidentifiedImageError:
        raise ImageIOError(path, "not a readable image file") from None
    except ImageIOError:
        raise
    except OSError as exc:
        raise ImageIOError(path, f"unreadable file ({exc})") from exc
    if arr.dtype != np.uint8:
        raise ImageIOError(path, f"unsupported sample type {arr.dtype}")
    return arr.astype(np.float64) / 255.0


def quantize(img) -> np.ndarray:
    return np.floor(np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def save_image(path, img) -> None:
    """Write a gray plane or RGB image as an 8-bit PNG."""
    from PIL import Image

    a = np.asarray(img)
    if not (a.ndim == 2 or (a.ndim == 3 and a.shape[2] == 3)):
        raise ImageIOError(path, f"cannot save array of shape {a.shape}")
    try:
        Image.fromarray(quantize(a)).save(path, format="PNG")
    except OSError as exc:
        raise ImageIOError(path, f"cannot write ({exc})") from exc
