"""Sobel directional gradients, their adjoint and the L1 magnitude map.

Kernels are applied by cross-correlation exactly as written::

    K_x = [[-1, 0, 1],        K_y = [[-1, -2, -1],
           [-2, 0, 2],               [ 0,  0,  0],
           [-1, 0, 1]]               [ 1,  2,  1]]

so a plane increasing left to right gives positive ``gx`` and one
increasing top to bottom gives positive ``gy``.
"""
from __future__ import annotations

import enum
from typing import NamedTuple

import numpy as np

from . import kernels
from .image import check_plane

KX = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
KY = KX.T.copy()


class PaddingMode(enum.Enum):
    ZERO = "zero"
    REFLECT = "reflect"

    @classmethod
    def parse(cls, value) -> "PaddingMode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown padding {value!r}; expected 'zero' or 'reflect'") from None


class GradientField(NamedTuple):
    gx: np.ndarray
    gy: np.ndarray


def sobel(img, pad: PaddingMode = PaddingMode.ZERO) -> GradientField:
    """Same-size Sobel responses with boundary samples supplied by ``pad``."""
    a = check_plane(img)
    gx, gy = kernels.sobel(a, PaddingMode.parse(pad) is PaddingMode.REFLECT)
    return GradientField(gx, gy)


def sobel_adjoint(field, pad: PaddingMode = PaddingMode.ZERO) -> np.ndarray:
    """Transpose of :func:`sobel`: ``<sobel(u), v> == <u, sobel_adjoint(v)>``."""
    gx, gy = field
    gx = check_plane(gx, "gx")
    gy = check_plane(gy, "gy")
    if gx.shape != gy.shape:
        raise ValueError(f"gx {gx.shape} and gy {gy.shape} differ in shape")
    return kernels.sobel_adjoint(gx, gy, PaddingMode.parse(pad) is PaddingMode.REFLECT)


def l1_magnitude(field) -> np.ndarray:
    """Per-pixel ``|gx| + |gy|``."""
    gx, gy = field
    return np.abs(gx) + np.abs(gy)
