# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: Sobel, bilinear resampling, separable Gaussian
filtering, and the exact adjoint of each.

Inputs must be C-contiguous float64 arrays.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()

cdef double[3][3] KX = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]]
cdef double[3][3] KY = [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]]


cdef inline Py_ssize_t _map(Py_ssize_t i, Py_ssize_t n, bint reflect) nogil:
    # -1 means "outside, contributes zero"
    if i < 0:
        return 1 if reflect else -1
    if i >= n:
        return n - 2 if reflect else -1
    return i


def sobel(const double[:, ::1] img, bint reflect):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    cdef Py_ssize_t i, j, r0, r1, r2, c0, c2
    cdef double a00, a01, a02, a10, a12, a20, a21, a22
    gx_arr = np.empty((h, w))
    gy_arr = np.empty((h, w))
    cdef double[:, ::1] gx = gx_arr
    cdef double[:, ::1] gy = gy_arr
    with nogil:
        for i in range(h):
            r0 = _map(i - 1, h, reflect)
            r1 = i
            r2 = _map(i + 1, h, reflect)
            for j in range(w):
                c0 = _map(j - 1, w, reflect)
                c2 = _map(j + 1, w, reflect)
                a00 = img[r0, c0] if (r0 >= 0 and c0 >= 0) else 0.0
                a01 = img[r0, j] if r0 >= 0 else 0.0
                a02 = img[r0, c2] if (r0 >= 0 and c2 >= 0) else 0.0
                a10 = img[r1, c0] if c0 >= 0 else 0.0
                a12 = img[r1, c2] if c2 >= 0 else 0.0
                a20 = img[r2, c0] if (r2 >= 0 and c0 >= 0) else 0.0
                a21 = img[r2, j] if r2 >= 0 else 0.0
                a22 = img[r2, c2] if (r2 >= 0 and c2 >= 0) else 0.0
                gx[i, j] = (a02 - a00) + 2.0 * (a12 - a10) + (a22 - a20)
                gy[i, j] = (a20 - a00) + 2.0 * (a21 - a01) + (a22 - a02)
    return gx_arr, gy_arr


def sobel_adjoint(const double[:, ::1] gx, const double[:, ::1] gy, bint reflect):
    cdef Py_ssize_t h = gx.shape[0], w = gx.shape[1]
    cdef Py_ssize_t i, j, a, b, r, c
    cdef double vx, vy
    out_arr = np.zeros((h, w))
    cdef double[:, ::1] out = out_arr
    with nogil:
        for i in range(h):
            for j in range(w):
                vx = gx[i, j]
                vy = gy[i, j]
                for a in range(3):
                    r = _map(i + a - 1, h, reflect)
                    if r < 0:
                        continue
                    for b in range(3):
                        c = _map(j + b - 1, w, reflect)
                        if c < 0:
                            continue
                        out[r, c] += KX[a][b] * vx + KY[a][b] * vy
    return out_arr


cdef void _weights(Py_ssize_t n_in, Py_ssize_t n_out, double scale,
                   Py_ssize_t[::1] i0, Py_ssize_t[::1] i1, double[::1] f) noexcept nogil:
    cdef Py_ssize_t i
    cdef double src
    for i in range(n_out):
        src = (i + 0.5) / scale - 0.5
        if src < 0.0:
            src = 0.0
        if src > n_in - 1.0:
            src = n_in - 1.0
        i0[i] = <Py_ssize_t>floor(src)
        i1[i] = i0[i] + 1 if i0[i] + 1 < n_in else n_in - 1
        f[i] = src - i0[i]


def resize(const double[:, ::1] img, Py_ssize_t out_h, Py_ssize_t out_w, double scale):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    cdef Py_ssize_t i, j
    cdef Py_ssize_t[::1] y0 = np.empty(out_h, dtype=np.intp)
    cdef Py_ssize_t[::1] y1 = np.empty(out_h, dtype=np.intp)
    cdef double[::1] fy = np.empty(out_h)
    cdef Py_ssize_t[::1] x0 = np.empty(out_w, dtype=np.intp)
    cdef Py_ssize_t[::1] x1 = np.empty(out_w, dtype=np.intp)
    cdef double[::1] fx = np.empty(out_w)
    cdef double[:, ::1] tmp = np.empty((h, out_w))
    out_arr = np.empty((out_h, out_w))
    cdef double[:, ::1] out = out_arr
    with nogil:
        _weights(h, out_h, scale, y0, y1, fy)
        _weights(w, out_w, scale, x0, x1, fx)
        for i in range(h):
            for j in range(out_w):
                tmp[i, j] = (1.0 - fx[j]) * img[i, x0[j]] + fx[j] * img[i, x1[j]]
        for i in range(out_h):
            for j in range(out_w):
                out[i, j] = (1.0 - fy[i]) * tmp[y0[i], j] + fy[i] * tmp[y1[i], j]
    return out_arr


def resize_adjoint(const double[:, ::1] g, Py_ssize_t in_h, Py_ssize_t in_w, double scale):
    cdef Py_ssize_t out_h = g.shape[0], out_w = g.shape[1]
    cdef Py_ssize_t i, j
    cdef Py_ssize_t[::1] y0 = np.empty(out_h, dtype=np.intp)
    cdef Py_ssize_t[::1] y1 = np.empty(out_h, dtype=np.intp)
    cdef double[::1] fy = np.empty(out_h)
    cdef Py_ssize_t[::1] x0 = np.empty(out_w, dtype=np.intp)
    cdef Py_ssize_t[::1] x1 = np.empty(out_w, dtype=np.intp)
    cdef double[::1] fx = np.empty(out_w)
    cdef double[:, ::1] tmp = np.zeros((in_h, out_w))
    out_arr = np.zeros((in_h, in_w))
    cdef double[:, ::1] out = out_arr
    with nogil:
        _weights(in_h, out_h, scale, y0, y1, fy)
        _weights(in_w, out_w, scale, x0, x1, fx)
        for i in range(out_h):
            for j in range(out_w):
                tmp[y0[i], j] += (1.0 - fy[i]) * g[i, j]
                tmp[y1[i], j] += fy[i] * g[i, j]
        for i in range(in_h):
            for j in range(out_w):
                out[i, x0[j]] += (1.0 - fx[j]) * tmp[i, j]
                out[i, x1[j]] += fx[j] * tmp[i, j]
    return out_arr


def gauss_valid(const double[:, ::1] img, const double[::1] k):
    cdef Py_ssize_t n = k.shape[0]
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    cdef Py_ssize_t oh = h - n + 1, ow = w - n + 1
    cdef Py_ssize_t i, j, t
    cdef double acc
    cdef double[:, ::1] tmp = np.empty((h, ow))
    out_arr = np.empty((oh, ow))
    cdef double[:, ::1] out = out_arr
    with nogil:
        for i in range(h):
            for j in range(ow):
                acc = 0.0
                for t in range(n):
                    acc = acc + k[t] * img[i, j + t]
                tmp[i, j] = acc
        for i in range(oh):
            for j in range(ow):
                acc = 0.0
                for t in range(n):
                    acc = acc + k[t] * tmp[i + t, j]
                out[i, j] = acc
    return out_arr


def gauss_valid_adjoint(const double[:, ::1] g, const double[::1] k):
    cdef Py_ssize_t n = k.shape[0]
    cdef Py_ssize_t oh = g.shape[0], ow = g.shape[1]
    cdef Py_ssize_t h = oh + n - 1, w = ow + n - 1
    cdef Py_ssize_t i, j, t
    cdef double[:, ::1] tmp = np.zeros((h, ow))
    out_arr = np.zeros((h, w))
    cdef double[:, ::1] out = out_arr
    with nogil:
        for i in range(oh):
            for t in range(n):
                for j in range(ow):
                    tmp[i + t, j] += k[t] * g[i, j]
        for i in range(h):
            for j in range(ow):
                for t in range(n):
                    out[i, j + t] += k[t] * tmp[i, j]
    return out_arr
