"""Backend selection for the numerical kernels.

The compiled ``_ckernels`` extension is used when it was built; otherwise
the numpy implementations in ``_pykernels`` are loaded.  Setting the
environment variable ``FUSEGRAD_PURE_PYTHON=1`` forces the fallback.
"""
import os

import numpy as np

from . import _pykernels

if os.environ.get("FUSEGRAD_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"


def _c(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def sobel(img, reflect):
    """Return ``(gx, gy)`` same-size Sobel correlations of ``img``."""
    return _impl.sobel(_c(img), bool(reflect))


def sobel_adjoint(gx, gy, reflect):
    return _impl.sobel_adjoint(_c(gx), _c(gy), bool(reflect))


def resize(img, out_h, out_w, scale):
    return _impl.resize(_c(img), int(out_h), int(out_w), float(scale))


def resize_adjoint(g, in_h, in_w, scale):
    return _impl.resize_adjoint(_c(g), int(in_h), int(in_w), float(scale))


def gauss_valid(img, k):
    return _impl.gauss_valid(_c(img), _c(k))


def gauss_valid_adjoint(g, k):
    return _impl.gauss_valid_adjoint(_c(g), _c(k))
