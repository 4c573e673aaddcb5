# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numerical kernels.

Same functions and algorithms as ``_kernels_py`` (see that module for the
derivations of the node sets and cut-overs), written as scalar loops.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, cosh, sinh, exp, log, sqrt

cnp.import_array()

cdef double EULER_GAMMA = 0.57721566490153286061
cdef double HALF_PI = 1.57079632679489661923
cdef double SERIES_LIMIT = 2.0
cdef int SERIES_TERMS = 16
cdef double TRAP_STEP = 0.35
cdef int TRAP_NODES = 29
cdef int RESEED = 64


cdef inline double _scaled_integral(double x, bint with_sech) nogil:
    # sinh and cosh of the half-angles t_i / 2 = i * a come from the
    # hyperbolic rotation recurrence, leaving one exp per node; the integrand
    # decays doubly exponentially, so the loop stops once terms are negligible.
    cdef double s = sqrt(x)
    cdef double a = 0.5 * TRAP_STEP / s
    cdef double sa = sinh(a), ca = cosh(a)
    cdef double sh = 0.0, ch = 1.0, tmp
    cdef double acc = 0.5, val
    cdef int i
    for i in range(1, TRAP_NODES):
        tmp = sh * ca + ch * sa
        ch = ch * ca + sh * sa
        sh = tmp
        val = exp(-2.0 * x * sh * sh)
        if with_sech:
            val /= 1.0 + 2.0 * sh * sh
        acc += val
        if val < 1e-17 * acc:
            break
    return acc * TRAP_STEP * exp(-x) / s


cdef inline double _k0(double x) nogil:
    cdef double y, term, i0, acc, harmonic
    cdef int k
    if x <= SERIES_LIMIT:
        y = 0.25 * x * x
        term = 1.0
        i0 = 1.0
        acc = 0.0
        harmonic = 0.0
        for k in range(1, SERIES_TERMS):
            term = term * y / (k * k)
            harmonic += 1.0 / k
            i0 += term
            acc += harmonic * term
        return acc - (log(0.5 * x) + EULER_GAMMA) * i0
    return _scaled_integral(x, False)


cdef inline double _k0_integral(double b) nogil:
    cdef double half, log_half, sq, power, acc, harmonic, fact2
    cdef int k, odd
    if b <= 0.0:
        return 0.0
    if b <= SERIES_LIMIT:
        half = 0.5 * b
        log_half = log(half)
        sq = half * half
        power = half
        acc = 0.0
        harmonic = 0.0
        fact2 = 1.0
        for k in range(SERIES_TERMS):
            if k > 0:
                harmonic += 1.0 / k
                fact2 *= k * k
                power *= sq
            odd = 2 * k + 1
            acc += 2.0 * power / (fact2 * odd) * (
                harmonic - EULER_GAMMA + 1.0 / odd - log_half)
        return acc
    return HALF_PI - _scaled_integral(b, True)


def k0(x):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] src = np.ascontiguousarray(
        x, dtype=np.float64).reshape(-1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty_like(src)
    cdef double[::1] sv = src
    cdef double[::1] ov = out
    cdef Py_ssize_t i, n = src.shape[0]
    with nogil:
        for i in range(n):
            ov[i] = _k0(sv[i])
    return out.reshape(np.shape(x))


def k0_integral(b):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] src = np.ascontiguousarray(
        b, dtype=np.float64).reshape(-1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty_like(src)
    cdef double[::1] sv = src
    cdef double[::1] ov = out
    cdef Py_ssize_t i, n = src.shape[0]
    with nogil:
        for i in range(n):
            ov[i] = _k0_integral(sv[i])
    return out.reshape(np.shape(b))


def cosine_sum(coef, double h, x):
    cdef double[::1] cv = np.ascontiguousarray(coef, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xs = np.ascontiguousarray(
        x, dtype=np.float64).reshape(-1)
    cdef double[::1] xv = xs
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(xs.shape[0])
    cdef double[::1] ov = out
    cdef Py_ssize_t j, k, nk = cv.shape[0], nx = xs.shape[0]
    cdef double theta, c1, s1, c, s, tmp, acc
    with nogil:
        for j in range(nx):
            theta = h * xv[j]
            c1 = cos(theta)
            s1 = sin(theta)
            c = 1.0
            s = 0.0
            acc = 0.0
            for k in range(nk):
                if k % RESEED == 0:
                    c = cos(k * theta)
                    s = sin(k * theta)
                acc += cv[k] * c
                tmp = c * c1 - s * s1
                s = s * c1 + c * s1
                c = tmp
            ov[j] = acc
    return out
