# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numeric kernels. Same contracts as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor, sqrt

cnp.import_array()


cdef inline void _axis(Py_ssize_t n_in, Py_ssize_t n_out, Py_ssize_t i,
                       Py_ssize_t* lo, Py_ssize_t* hi, double* frac) noexcept nogil:
    cdef double scale = <double>n_in / <double>n_out
    cdef double pos = (<double>i + 0.5) * scale - 0.5
    if pos < 0.0:
        pos = 0.0
    if pos > <double>(n_in - 1):
        pos = <double>(n_in - 1)
    lo[0] = <Py_ssize_t>floor(pos)
    hi[0] = lo[0] + 1 if lo[0] + 1 < n_in else n_in - 1
    frac[0] = pos - <double>lo[0]


def resize_bilinear(const double[:, :, ::1] img, Py_ssize_t out_h, Py_ssize_t out_w):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1], ch = img.shape[2]
    out = np.empty((out_h, out_w, ch), dtype=np.float64)
    cdef double[:, :, ::1] o = out
    cdef Py_ssize_t i, j, c, y0, y1, x0, x1
    cdef double fy, fx, top, bottom
    with nogil:
        for i in range(out_h):
            _axis(h, out_h, i, &y0, &y1, &fy)
            for j in range(out_w):
                _axis(w, out_w, j, &x0, &x1, &fx)
                for c in range(ch):
                    top = img[y0, x0, c] * (1.0 - fx) + img[y0, x1, c] * fx
                    bottom = img[y1, x0, c] * (1.0 - fx) + img[y1, x1, c] * fx
                    o[i, j, c] = top * (1.0 - fy) + bottom * fy
    return out


def resample_linear(const double[::1] x, long src_rate, long dst_rate, Py_ssize_t m):
    cdef Py_ssize_t n = x.shape[0]
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t j, lo
    cdef double pos, frac
    with nogil:
        for j in range(m):
            pos = (<double>j * <double>src_rate) / <double>dst_rate
            lo = <Py_ssize_t>floor(pos)
            if lo >= n - 1:
                o[j] = x[n - 1]
            else:
                frac = pos - <double>lo
                o[j] = x[lo] * (1.0 - frac) + x[lo + 1] * frac
    return out


def linear(const float[:, ::1] weight, const float[::1] bias, const float[:, ::1] x):
    cdef Py_ssize_t m = weight.shape[0], k = weight.shape[1], r = x.shape[0]
    out = np.empty((r, m), dtype=np.float32)
    cdef float[:, ::1] o = out
    cdef Py_ssize_t row, i, j
    cdef double acc
    with nogil:
        for row in range(r):
            for i in range(m):
                acc = 0.0
                for j in range(k):
                    acc += <double>weight[i, j] * <double>x[row, j]
                acc += <double>bias[i]
                o[row, i] = <float>acc
    return out


def frame_rms(const float[::1] x, Py_ssize_t frame, Py_ssize_t hop):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t count = 0 if n < frame else (n - frame) // hop + 1
    out = np.empty(count, dtype=np.float32)
    cdef float[::1] o = out
    cdef Py_ssize_t t, i
    cdef double acc, v
    with nogil:
        for t in range(count):
            acc = 0.0
            for i in range(t * hop, t * hop + frame):
                v = <double>x[i]
                acc += v * v
            o[t] = <float>sqrt(acc / <double>frame)
    return out


cdef inline int _paeth(int a, int b, int c) noexcept nogil:
    cdef int p = a + b - c
    cdef int pa = p - a if p >= a else a - p
    cdef int pb = p - b if p >= b else b - p
    cdef int pc = p - c if p >= c else c - p
    if pa <= pb and pa <= pc:
        return a
    if pb <= pc:
        return b
    return c


def png_unfilter(const unsigned char[::1] data, Py_ssize_t height, Py_ssize_t stride, Py_ssize_t bpp):
    out = bytearray(height * stride)
    cdef unsigned char[::1] o = out
    cdef Py_ssize_t row, i, base, cur, prv
    cdef int ftype, left, up, upleft
    for row in range(height):
        base = row * (stride + 1)
        ftype = data[base]
        if ftype > 4:
            raise ValueError(f"unknown PNG filter type {ftype} on row {row}")
        cur = row * stride
        prv = cur - stride
        with nogil:
            for i in range(stride):
                left = o[cur + i - bpp] if i >= bpp else 0
                up = o[prv + i] if row > 0 else 0
                upleft = o[prv + i - bpp] if (row > 0 and i >= bpp) else 0
                if ftype == 0:
                    o[cur + i] = data[base + 1 + i]
                elif ftype == 1:
                    o[cur + i] = (data[base + 1 + i] + left) & 0xFF
                elif ftype == 2:
                    o[cur + i] = (data[base + 1 + i] + up) & 0xFF
                elif ftype == 3:
                    o[cur + i] = (data[base + 1 + i] + ((left + up) >> 1)) & 0xFF
                else:
                    o[cur + i] = (data[base + 1 + i] + _paeth(left, up, upleft)) & 0xFF
    return bytes(out)
