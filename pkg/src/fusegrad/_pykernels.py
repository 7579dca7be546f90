"""Numpy reference kernels.

Same signatures as the compiled ``_ckernels`` module.  All arrays are
C-contiguous float64; callers in :mod:`fusegrad.kernels` take care of that.
"""
from functools import lru_cache

import numpy as np

_KX = ((-1.0, 0.0, 1.0), (-2.0, 0.0, 2.0), (-1.0, 0.0, 1.0))
_KY = ((-1.0, -2.0, -1.0), (0.0, 0.0, 0.0), (1.0, 2.0, 1.0))


def _pad(img, reflect):
    return np.pad(img, 1, mode="reflect" if reflect else "constant")


def sobel(img, reflect):
    h, w = img.shape
    p = _pad(img, reflect)
    gx = (p[0:h, 2:] - p[0:h, 0:w]) + 2.0 * (p[1:h + 1, 2:] - p[1:h + 1, 0:w]) + (p[2:, 2:] - p[2:, 0:w])
    gy = (p[2:, 0:w] - p[0:h, 0:w]) + 2.0 * (p[2:, 1:w + 1] - p[0:h, 1:w + 1]) + (p[2:, 2:] - p[0:h, 2:])
    return gx, gy


def sobel_adjoint(gx, gy, reflect):
    h, w = gx.shape
    q = np.zeros((h + 2, w + 2))
    for a in range(3):
        for b in range(3):
            kx, ky = _KX[a][b], _KY[a][b]
            if kx:
                q[a:a + h, b:b + w] += kx * gx
            if ky:
                q[a:a + h, b:b + w] += ky * gy
    if reflect:
        # padded index 0 mirrors source 1, padded h+1 mirrors source h-2
        q[2, :] += q[0, :]
        q[h - 1, :] += q[h + 1, :]
        q[:, 2] += q[:, 0]
        q[:, w - 1] += q[:, w + 1]
    return q[1:h + 1, 1:w + 1].copy()


@lru_cache(maxsize=256)
def _interp_matrix(n_in, n_out, scale):
    m = np.zeros((n_out, n_in))
    for i in range(n_out):
        src = (i + 0.5) / scale - 0.5
        src = min(max(src, 0.0), n_in - 1.0)
        i0 = int(np.floor(src))
        i1 = min(i0 + 1, n_in - 1)
        f = src - i0
        m[i, i0] += 1.0 - f
        m[i, i1] += f
    m.setflags(write=False)
    return m


def resize(img, out_h, out_w, scale):
    h, w = img.shape
    ay = _interp_matrix(h, out_h, scale)
    ax = _interp_matrix(w, out_w, scale)
    return ay @ img @ ax.T


def resize_adjoint(g, in_h, in_w, scale):
    out_h, out_w = g.shape
    ay = _interp_matrix(in_h, out_h, scale)
    ax = _interp_matrix(in_w, out_w, scale)
    return ay.T @ g @ ax


def gauss_valid(img, k):
    n = k.shape[0]
    h, w = img.shape
    ow, oh = w - n + 1, h - n + 1
    tmp = np.zeros((h, ow))
    for t in range(n):
        tmp += k[t] * img[:, t:t + ow]
    out = np.zeros((oh, ow))
    for t in range(n):
        out += k[t] * tmp[t:t + oh, :]
    return out


def gauss_valid_adjoint(g, k):
    n = k.shape[0]
    oh, ow = g.shape
    h, w = oh + n - 1, ow + n - 1
    tmp = np.zeros((h, ow))
    for t in range(n):
        tmp[t:t + oh, :] += k[t] * g
    out = np.zeros((h, w))
    for t in range(n):
        out[:, t:t + ow] += k[t] * tmp
    return out
