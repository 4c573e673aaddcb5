"""NumPy implementations of the numerical kernels.

This module mirrors ``_kernels.pyx`` function for function and is used when
the compiled extension is unavailable (or ``CCISTAT_PURE_PYTHON`` is set).
"""

import numpy as np

EULER_GAMMA = 0.57721566490153286061
HALF_PI = 0.5 * np.pi

# Power series are used up to this argument; beyond it the scaled
# integral representations below take over.
SERIES_LIMIT = 2.0
SERIES_TERMS = 16

# Trapezoid nodes for  K0(x) = e^-x x^-1/2 int_0^inf exp(-x (cosh(v/sqrt x) - 1)) dv.
# The integrand is entire and decays doubly exponentially, so a fixed step
# of 0.35 is accurate to ~1e-15 relative for every x > 2.
TRAP_STEP = 0.35
TRAP_NODES = 29
_V = TRAP_STEP * np.arange(TRAP_NODES)
_W = np.full(TRAP_NODES, TRAP_STEP)
_W[0] = 0.5 * TRAP_STEP

# Cosine sums re-seed the rotation recurrence this often.
RESEED = 64

_CHUNK = 1 << 20


def _scaled_integral(x, with_sech):
    s = np.sqrt(x)
    t = _V[None, :] / s[:, None]
    half = np.sinh(0.5 * t)
    vals = np.exp(-2.0 * x[:, None] * half * half)
    if with_sech:
        vals /= np.cosh(t)
    return (vals @ _W) * np.exp(-x) / s


def k0(x):
    """Modified Bessel function of the second kind, order zero.

    ``x`` must be positive; the caller validates the domain.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty_like(x)
    flat_x = x.reshape(-1)
    flat = out.reshape(-1)
    small = flat_x <= SERIES_LIMIT
    xs = flat_x[small]
    if xs.size:
        y = 0.25 * xs * xs
        term = np.ones_like(xs)
        i0 = np.ones_like(xs)
        acc = np.zeros_like(xs)
        harmonic = 0.0
        for k in range(1, SERIES_TERMS):
            term = term * y / (k * k)
            harmonic += 1.0 / k
            i0 += term
            acc += harmonic * term
        flat[small] = acc - (np.log(0.5 * xs) + EULER_GAMMA) * i0
    xl = flat_x[~small]
    if xl.size:
        flat[~small] = _scaled_integral(xl, with_sech=False)
    return out


def k0_integral(b):
    """Integral of K0 from 0 to ``b`` (``b >= 0``)."""
    b = np.ascontiguousarray(b, dtype=np.float64)
    out = np.empty_like(b)
    flat_b = b.reshape(-1)
    flat = out.reshape(-1)
    small = flat_b <= SERIES_LIMIT
    bs = flat_b[small]
    if bs.size:
        half = 0.5 * bs
        with np.errstate(divide="ignore"):
            log_half = np.log(half)
        sq = half * half
        power = half.copy()
        acc = np.zeros_like(bs)
        harmonic = 0.0
        fact2 = 1.0
        for k in range(SERIES_TERMS):
            if k > 0:
                harmonic += 1.0 / k
                fact2 *= k * k
                power = power * sq
            odd = 2 * k + 1
            bracket = harmonic - EULER_GAMMA + 1.0 / odd - log_half
            acc += 2.0 * power / (fact2 * odd) * np.where(bs > 0, bracket, 0.0)
        flat[small] = acc
    bl = flat_b[~small]
    if bl.size:
        flat[~small] = HALF_PI - _scaled_integral(bl, with_sech=True)
    return out


def cosine_sum(coef, h, x):
    """Return ``sum_k coef[k] * cos(k * h * x_j)`` for every ``x_j``."""
    coef = np.ascontiguousarray(coef, dtype=np.float64)
    x = np.ascontiguousarray(x, dtype=np.float64)
    w = h * np.arange(coef.size)
    out = np.empty(x.size)
    rows = max(1, _CHUNK // max(coef.size, 1))
    for start in range(0, x.size, rows):
        xb = x[start:start + rows]
        out[start:start + rows] = np.cos(np.outer(xb, w)) @ coef
    return out
