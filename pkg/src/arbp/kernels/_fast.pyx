# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Cython implementations of the message-passing hot kernels.

Must match arbp.kernels.numpy_backend exactly (up to roundoff); the test
suite cross-checks the two backends on random graphs.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport atanh, exp, fabs, tanh

cnp.import_array()

EPS_CLIP = 1e-7
DEF _EPS_CLIP = 1e-7
DEF _TAYLOR_EXACT_CUTOFF = 0.95


def variable_step(double[:, ::1] llr, double[:, ::1] x_prev,
                  long[::1] vv, long[::1] var_edges, long[::1] var_ptr):
    cdef Py_ssize_t B = x_prev.shape[0], E = x_prev.shape[1]
    cdef Py_ssize_t n = var_ptr.shape[0] - 1
    out_arr = np.empty((B, E), dtype=np.float64)
    tot_arr = np.zeros((B, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double[:, ::1] tot = tot_arr
    cdef Py_ssize_t b, e, v
    cdef double s, lim = 1.0 - _EPS_CLIP
    for b in range(B):
        for v in range(n):
            s = 0.0
            for e in range(var_ptr[v], var_ptr[v + 1]):
                s += x_prev[b, var_edges[e]]
            tot[b, v] = s
        for e in range(E):
            v = vv[e]
            s = tanh(0.5 * (llr[b, v] + tot[b, v] - x_prev[b, e]))
            if s > lim:
                s = lim
            elif s < -lim:
                s = -lim
            out[b, e] = s
    return out_arr


cdef void _exclusion_row(double[::1] x, long lo, long hi,
                         double[::1] pre, double[::1] suf,
                         double[::1] t) nogil:
    cdef Py_ssize_t d = hi - lo, i
    cdef double acc = 1.0
    for i in range(d):
        pre[i] = acc
        acc *= x[lo + i]
    acc = 1.0
    for i in range(d - 1, -1, -1):
        suf[i] = acc
        acc *= x[lo + i]
    for i in range(d):
        t[lo + i] = pre[i] * suf[i]


def check_step_exact(double[:, ::1] x_prev, long[::1] check_ptr, Py_ssize_t dc_max):
    cdef Py_ssize_t B = x_prev.shape[0], E = x_prev.shape[1]
    cdef Py_ssize_t m = check_ptr.shape[0] - 1
    out_arr = np.empty((B, E), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    pre_arr = np.empty(dc_max, dtype=np.float64)
    suf_arr = np.empty(dc_max, dtype=np.float64)
    cdef double[::1] pre = pre_arr, suf = suf_arr
    cdef Py_ssize_t b, c, e
    cdef double t, lim = 1.0 - _EPS_CLIP
    for b in range(B):
        for c in range(m):
            _exclusion_row(x_prev[b], check_ptr[c], check_ptr[c + 1],
                           pre, suf, out[b])
        for e in range(E):
            t = out[b, e]
            if t > lim:
                t = lim
            elif t < -lim:
                t = -lim
            out[b, e] = 2.0 * atanh(t)
    return out_arr


def check_step_taylor(double[:, ::1] x_prev, long[::1] check_ptr,
                      Py_ssize_t dc_max, int q):
    cdef Py_ssize_t B = x_prev.shape[0], E = x_prev.shape[1]
    cdef Py_ssize_t m = check_ptr.shape[0] - 1
    out_arr = np.empty((B, E), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    pre_arr = np.empty(dc_max, dtype=np.float64)
    suf_arr = np.empty(dc_max, dtype=np.float64)
    cdef double[::1] pre = pre_arr, suf = suf_arr
    cdef Py_ssize_t b, c, e
    cdef int mm
    cdef double t, t2, acc
    # below the cutoff the series tail is under double precision, so
    # 2*atanh(t) evaluates the truncated sum exactly (see numpy_backend)
    cdef double cutoff = exp(-39.1 / (q + 2))
    if cutoff > _TAYLOR_EXACT_CUTOFF:
        cutoff = _TAYLOR_EXACT_CUTOFF
    for b in range(B):
        for c in range(m):
            _exclusion_row(x_prev[b], check_ptr[c], check_ptr[c + 1],
                           pre, suf, out[b])
        for e in range(E):
            t = out[b, e]
            if fabs(t) < cutoff:
                out[b, e] = 2.0 * atanh(t)
            else:
                t2 = t * t
                acc = 1.0 / q
                for mm in range((q - 1) // 2 - 1, -1, -1):
                    acc = acc * t2 + 1.0 / (2 * mm + 1)
                out[b, e] = 2.0 * t * acc
    return out_arr
