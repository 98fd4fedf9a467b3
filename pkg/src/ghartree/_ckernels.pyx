# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Fused pointwise kernels for the nonlinear sub-step.

Same contract as ``_pykernels``; operates on flat views of C-contiguous
arrays and avoids the temporaries numpy would allocate. Powers a2^e with
2e a small non-negative integer are formed from products and one sqrt.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport pow, cos, sin, sqrt, fabs, floor

cnp.import_array()

cdef extern from "math.h" nogil:
    void sincos(double x, double *s, double *c)


cdef inline int _half_steps(double e) noexcept nogil:
    # 2e when it is an integer in [0, 32], else -1
    cdef double t = 2.0 * e
    if t >= 0.0 and t <= 32.0 and t == floor(t):
        return <int>t
    return -1


cdef inline double _powh(double a2, int m, double e) noexcept nogil:
    cdef double r = 1.0
    cdef int q
    if m < 0:
        return pow(a2, e)
    q = m >> 1
    while q > 0:
        r *= a2
        q -= 1
    if m & 1:
        r *= sqrt(a2)
    return r


def abs_pow(u, double p):
    cdef double complex[::1] uf = np.ascontiguousarray(u).reshape(-1)
    out = np.empty(u.shape, dtype=np.float64)
    cdef double[::1] of = out.reshape(-1)
    cdef Py_ssize_t i, n = uf.shape[0]
    cdef double a2, e = 0.5 * p
    cdef int m = _half_steps(e)
    with nogil:
        for i in range(n):
            a2 = uf[i].real * uf[i].real + uf[i].imag * uf[i].imag
            of[i] = _powh(a2, m, e)
    return out


def veff(u, V, double p):
    cdef double complex[::1] uf = np.ascontiguousarray(u).reshape(-1)
    cdef double[::1] vf = np.ascontiguousarray(V, dtype=np.float64).reshape(-1)
    out = np.empty(np.shape(u), dtype=np.float64)
    cdef double[::1] of = out.reshape(-1)
    cdef Py_ssize_t i, n = uf.shape[0]
    cdef double a2, e = 0.5 * (p - 2.0)
    cdef int m = _half_steps(e)
    with nogil:
        for i in range(n):
            a2 = uf[i].real * uf[i].real + uf[i].imag * uf[i].imag
            of[i] = vf[i] * _powh(a2, m, e)
    return out


def potential_term(u, V, double p):
    cdef double complex[::1] uf = np.ascontiguousarray(u).reshape(-1)
    cdef double[::1] vf = np.ascontiguousarray(V, dtype=np.float64).reshape(-1)
    out = np.empty(np.shape(u), dtype=np.complex128)
    cdef double complex[::1] of = out.reshape(-1)
    cdef Py_ssize_t i, n = uf.shape[0]
    cdef double a2, w, e = 0.5 * (p - 2.0)
    cdef int m = _half_steps(e)
    with nogil:
        for i in range(n):
            a2 = uf[i].real * uf[i].real + uf[i].imag * uf[i].imag
            w = vf[i] * _powh(a2, m, e)
            of[i] = w * uf[i]
    return out


def phase_rotate(cnp.ndarray u, V, double p, double dt):
    if not (u.flags.c_contiguous and u.dtype == np.complex128):
        raise ValueError("phase_rotate needs a C-contiguous complex128 array")
    cdef double[::1] uf = u.reshape(-1).view(np.float64)
    cdef double[::1] vf = np.ascontiguousarray(V, dtype=np.float64).reshape(-1)
    cdef Py_ssize_t i, n = vf.shape[0]
    cdef double a2, w, c, s, re, im, vmax = 0.0, e = 0.5 * (p - 2.0)
    cdef int m = _half_steps(e)
    with nogil:
        for i in range(n):
            re = uf[2 * i]
            im = uf[2 * i + 1]
            a2 = re * re + im * im
            w = vf[i] * _powh(a2, m, e)
            if fabs(w) > vmax:
                vmax = fabs(w)
            sincos(w * dt, &s, &c)
            uf[2 * i] = re * c - im * s
            uf[2 * i + 1] = re * s + im * c
    return vmax
