# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-pixel feature kernels (LBP codes, HOG cell histograms).

Twin of ``_kernels_py``; selected at import time by ``kernels``.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()

BACKEND = "cython"


def lbp_code_image(img):
    arr = np.ascontiguousarray(img, dtype=np.uint8)
    cdef const unsigned char[:, ::1] a = arr
    cdef Py_ssize_t h = a.shape[0]
    cdef Py_ssize_t w = a.shape[1]
    out_arr = np.zeros((h - 2, w - 2), dtype=np.uint8)
    cdef unsigned char[:, ::1] out = out_arr
    cdef Py_ssize_t y, x
    cdef const unsigned char *top
    cdef const unsigned char *mid
    cdef const unsigned char *bot
    cdef unsigned char p
    cdef unsigned int code
    for y in range(1, h - 1):
        top = &a[y - 1, 0]
        mid = &a[y, 0]
        bot = &a[y + 1, 0]
        for x in range(1, w - 1):
            p = mid[x]
            code = 0
            if mid[x + 1] >= p:
                code |= 128
            if bot[x + 1] >= p:
                code |= 64
            if bot[x] >= p:
                code |= 32
            if bot[x - 1] >= p:
                code |= 16
            if mid[x - 1] >= p:
                code |= 8
            if top[x - 1] >= p:
                code |= 4
            if top[x] >= p:
                code |= 2
            if top[x + 1] >= p:
                code |= 1
            out[y - 1, x - 1] = <unsigned char> code
    return out_arr


def hog_cell_histograms(mag, theta, Py_ssize_t cell, Py_ssize_t bins):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] m = np.ascontiguousarray(mag, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] t = np.ascontiguousarray(theta, dtype=np.float64)
    cdef Py_ssize_t h = m.shape[0]
    cdef Py_ssize_t w = m.shape[1]
    cdef Py_ssize_t cy = h // cell
    cdef Py_ssize_t cx = w // cell
    cdef cnp.ndarray[cnp.float64_t, ndim=3] hist = np.zeros((cy, cx, bins), dtype=np.float64)
    cdef double bin_width = 180.0 / bins
    cdef Py_ssize_t y, x, lo, hi
    cdef double pos, fl, frac, g
    for y in range(h):
        for x in range(w):
            g = m[y, x]
            pos = t[y, x] / bin_width - 0.5
            fl = floor(pos)
            frac = pos - fl
            lo = (<Py_ssize_t> fl) % bins
            if lo < 0:
                lo += bins
            hi = (lo + 1) % bins
            hist[y // cell, x // cell, lo] += g * (1.0 - frac)
            hist[y // cell, x // cell, hi] += g * frac
    return hist
