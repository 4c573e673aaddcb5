"""Numerical inversion of even characteristic functions.

The density is ``f(x) = (1/pi) int_0^inf [Psi(w) - atom] cos(w x) dw``. The
integral is evaluated by the trapezoid rule in ``w`` with step
``h = 2 pi / P``; by Poisson summation this reproduces the density periodized
with period ``P``, so ``P`` is chosen well beyond the support that matters.

Slowly decaying characteristic functions are split first. For interference
without a Gaussian factor the atom and the single-interferer terms are
inverted in closed form (K0 densities) and only the remainder, which decays
at least like ``w^-2``, is integrated numerically up to a cut-off ``W``. The
part beyond ``W`` is integrated term by term from the remainder's ``1/w``
expansion and the truncation of the trapezoid at ``W`` is corrected with
Euler-Maclaurin end terms. With a Gaussian factor the whole function decays
fast enough to be integrated directly.
"""

import logging
import math

import numpy as np
from scipy.fft import next_fast_len, rfft
from scipy.special import sici

from .._backend import kernels
from ..errors import InvalidArgumentError, InversionError
from .cf import CfEvaluator, InterferenceCf
from .density import GridSpec, NumericPdf, default_grid
from .special import k0_cell_average

log = logging.getLogger(__name__)

# Remainder expansion used beyond W must converge fast: W^2 min(E) >= 3600.
SERIES_RADIUS_FACTOR = 60.0
# Gaussian-factor cut-off: exp(-s W^2 / 2) <= exp(-GAUSS_EXPONENT).
GAUSS_EXPONENT = 40.0
# Support length (in units of the slowest decay length) that periodization must clear.
ALIAS_DECAY_LENGTHS = 45.0
MAX_NODES = 4_000_000
# Above this x*W the tail integrals switch from recurrence to asymptotic series.
ASYMPTOTIC_XW = 40.0

_BERNOULLI = (1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0)


METHODS = ("fft", "direct")


def _period(grid, cf):
    """Periodization length, rounded up to a fast FFT length times ``dx``.

    Because ``P / dx`` is then an integer, the cosine sum on the grid is a
    discrete Fourier transform.
    """
    period = 4.0 * grid.x_max
    if isinstance(cf, InterferenceCf):
        need = grid.x_max + ALIAS_DECAY_LENGTHS * cf.tail_scale + 12.0 * math.sqrt(cf.gaussian_variance)
        period = max(period, need)
    size = next_fast_len(int(math.ceil(period / grid.dx - 1e-9)))
    return size * grid.dx, size


def _cosine_sum_fft(coef, size, count):
    """``sum_j coef[j] cos(2 pi j k / size)`` for ``k < count``."""
    folded = np.bincount(np.arange(coef.size) % size, weights=coef, minlength=size)
    return rfft(folded)[:count].real


def _power_tail_integrals(x, cutoff, order):
    """``C[n] = int_W^inf w^-n cos(x w) dw`` for ``n = 0..order`` (``x >= 0``).

    Rows 0 and 1 are left at zero; only ``n >= 2`` is needed.
    """
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros((order + 1, x.size))
    z = x * cutoff
    zero = x == 0
    for n in range(2, order + 1):
        out[n, zero] = cutoff ** (1 - n) / (n - 1)

    mid = (~zero) & (z <= ASYMPTOTIC_XW)
    if np.any(mid):
        xm = x[mid]
        zm = z[mid]
        si, ci = sici(zm)
        c_prev, s_prev = -ci, 0.5 * np.pi - si
        cz, sz = np.cos(zm), np.sin(zm)
        for n in range(2, order + 1):
            wn = cutoff ** (1 - n)
            c_n = (wn * cz - xm * s_prev) / (n - 1)
            s_n = (wn * sz + xm * c_prev) / (n - 1)
            out[n, mid] = c_n
            c_prev, s_prev = c_n, s_n

    far = z > ASYMPTOTIC_XW
    if np.any(far):
        xf = x[far]
        zf = z[far]
        phase = np.exp(1j * zf)
        for n in range(2, order + 1):
            # -e^{ixW} sum_k (n)_k W^{-n-k} / (i x)^{k+1}
            term = cutoff ** (-n) / (1j * xf)
            acc = term.copy()
            for k in range(1, 60):
                term = term * (n + k - 1) / (1j * zf)
                acc += term
                if np.all(np.abs(term) <= 1e-17 * np.abs(acc)):
                    break
            out[n, far] = np.real(-phase * acc)
    return out


def _euler_maclaurin(x, cutoff, step, series):
    """Trapezoid-minus-integral end correction at ``W`` for ``R(w) cos(w x)``."""
    order = series.size - 1
    n = np.arange(order + 1, dtype=np.float64)
    active = series != 0
    # derivatives R^{(j)}(W) for j = 0..5
    deriv = []
    for j in range(6):
        rising = np.ones(order + 1)
        for i in range(j):
            rising *= -(n + i)
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(active, series * rising * cutoff ** (-n - j), 0.0)
        deriv.append(float(np.sum(terms)))
    correction = np.zeros_like(x)
    for idx, b2j in enumerate(_BERNOULLI):
        k = 2 * idx + 1
        g = np.zeros_like(x)
        for j in range(k + 1):
            m = k - j
            g += math.comb(k, j) * deriv[j] * x ** m * np.cos(x * cutoff + 0.5 * math.pi * m)
        correction += b2j / math.factorial(k + 1) * step ** (k + 1) * g
    return correction


def _fit_series(cf, cutoff, order=8):
    """Least-squares ``1/w`` expansion of ``Psi - atom`` on ``[W, 6W]``."""
    w = cutoff * np.geomspace(1.0, 6.0, 48)
    target = cf.eval(w) - cf.atom_mass
    powers = np.arange(1, order + 1)
    basis = (cutoff / w[:, None]) ** powers[None, :]
    scaled, *_ = np.linalg.lstsq(basis, target, rcond=None)
    series = np.zeros(order + 1)
    series[1:] = scaled * cutoff ** powers
    return series


def _trapezoid_coefficients(values, step):
    coef = step * values
    coef[0] *= 0.5
    coef[-1] *= 0.5
    return coef


def _numeric_part(x, func, step, cutoff, series, size, method):
    """``(1/pi) int_0^inf R(w) cos(wx) dw`` given ``R`` on nodes up to ``cutoff``.

    ``x`` is ``dx * arange(n)`` and ``step * dx * size == 2 pi``.
    """
    nodes = int(round(cutoff / step))
    if nodes > MAX_NODES:
        raise InversionError("too many quadrature nodes",
                             {"cutoff": cutoff, "step": step, "nodes": nodes})
    cutoff = nodes * step
    w = step * np.arange(nodes + 1)
    values = func(w)
    coef = _trapezoid_coefficients(values, step)
    if method == "fft":
        total = _cosine_sum_fft(coef, size, x.size)
    else:
        total = kernels.cosine_sum(coef, step, x)
    if series is not None and np.any(series):
        total -= _euler_maclaurin(x, cutoff, step, series)
        tails = _power_tail_integrals(x, cutoff, series.size - 1)
        total += series @ tails
    return total / math.pi, nodes, cutoff


def _tail_bound(func, series, cutoff):
    """Bound on ``(1/pi) int_W^inf |R - series|``, the part the expansion misses."""
    w = cutoff * np.array([1.0, 1.5, 2.0, 4.0])
    n = np.arange(series.size)
    approx = (w[:, None] ** -n[None, :].astype(float)) @ series
    resid = np.max(np.abs(func(w) - approx) * w)
    return float(resid / math.pi)


def _finish(x_pos, f_pos, atom, singular, diagnostics):
    f_pos = np.asarray(f_pos, dtype=np.float64)
    most_negative = float(f_pos.min(initial=0.0))
    if most_negative < -1e-6:
        raise InversionError("inverted density is significantly negative",
                             dict(diagnostics, most_negative=most_negative))
    f_pos = np.maximum(f_pos, 0.0)
    x = np.concatenate([-x_pos[:0:-1], x_pos])
    f = np.concatenate([f_pos[:0:-1], f_pos])
    diagnostics["most_negative"] = most_negative
    pdf = NumericPdf(x, f, atom, singular, diagnostics)
    diagnostics["normalization"] = pdf.mass()
    return pdf.check()


def _invert_interference(cf, grid, method):
    x = grid.nonnegative_points()
    period, size = _period(grid, cf)
    step = 2.0 * math.pi / period
    diagnostics = {"period": period, "step": step, "method": method}

    if cf.gaussian_variance > 0:
        s = cf.gaussian_variance
        cutoff = math.sqrt(2.0 * GAUSS_EXPONENT / s)
        f, nodes, cutoff = _numeric_part(x, cf.eval, step, cutoff, None, size, method)
        diagnostics.update(cutoff=cutoff, nodes=nodes,
                           tail_bound=math.exp(-GAUSS_EXPONENT) / (s * cutoff))
        return _finish(x, f, 0.0, False, diagnostics)

    atom = cf.interference_atom
    f = np.zeros_like(x)
    singular = cf.num_active > 0
    for c, e in zip(cf.single_coefficients, cf.active_powers):
        if c == 0:
            continue
        part = np.empty_like(x)
        part[1:] = kernels.k0(x[1:] / math.sqrt(e)) / (math.pi * math.sqrt(e))
        part[0] = k0_cell_average(0.5 * grid.dx, e)
        f += c * part
    if cf.num_active >= 2:
        cutoff = SERIES_RADIUS_FACTOR / math.sqrt(cf.active_powers.min())
        series = cf.remainder_series()
        rem, nodes, cutoff = _numeric_part(x, cf.remainder, step, cutoff, series, size, method)
        f += rem
        diagnostics.update(cutoff=cutoff, nodes=nodes,
                           tail_bound=_tail_bound(cf.remainder, series, cutoff))
    return _finish(x, f, atom, singular and np.any(cf.single_coefficients > 0), diagnostics)


def _invert_generic(cf, grid, method):
    x = grid.nonnegative_points()
    period, size = _period(grid, cf)
    step = 2.0 * math.pi / period
    cutoff = 4.0 * math.pi / grid.dx
    series = _fit_series(cf, cutoff)
    scale = np.max(np.abs(cf.eval(np.array([cutoff]))) - cf.atom_mass, initial=0.0)
    if abs(series[1]) > 1e-6 * cutoff * max(scale, 1e-300) and abs(series[1]) / cutoff > 1e-10:
        raise InversionError("characteristic function decays like 1/w; extract the slow terms first",
                             {"cutoff": cutoff, "w_inverse_coefficient": float(series[1])})
    series[1] = 0.0

    def func(w):
        return cf.eval(w) - cf.atom_mass

    f, nodes, cutoff = _numeric_part(x, func, step, cutoff, series, size, method)
    diagnostics = {"period": period, "step": step, "method": method, "cutoff": cutoff, "nodes": nodes,
                   "tail_bound": _tail_bound(func, series, cutoff)}
    return _finish(x, f, cf.atom_mass, False, diagnostics)


def invert_cf(cf, grid=None, method="fft"):
    """Density of an even characteristic function on a symmetric grid.

    Parameters
    ----------
    cf : CfEvaluator
        Either an :class:`InterferenceCf` (singular parts are handled
        analytically) or any even characteristic function whose difference
        from its atom decays at least like ``w^-2``.
    grid : GridSpec, optional
        Defaults to :func:`default_grid` from the law's variance.
    method : {"fft", "direct"}
        Evaluate the trapezoid cosine sum by a real FFT (the quadrature
        period is a whole number of grid steps) or by the compiled direct
        summation kernel. Both give the same values up to rounding.

    Returns
    -------
    NumericPdf

    Raises
    ------
    InversionError
        If the result is not normalized within 1e-3 or the quadrature would
        need more than ``MAX_NODES`` nodes.
    """
    if not isinstance(cf, CfEvaluator):
        raise InvalidArgumentError("invert_cf expects a CfEvaluator")
    if method not in METHODS:
        raise InvalidArgumentError(f"unknown method {method!r}; expected one of {METHODS}")
    if isinstance(cf, InterferenceCf):
        if grid is None:
            grid = default_grid(cf.variance, cf.tail_scale, math.sqrt(cf.gaussian_variance))
        if cf.num_active == 0 and cf.gaussian_variance == 0:
            x = grid.points()
            return NumericPdf(x, np.zeros_like(x), 1.0, False, {"normalization": 1.0})
        return _invert_interference(cf, grid, method)
    if grid is None:
        if cf.variance is None:
            raise InvalidArgumentError("a grid is required when the law's variance is unknown")
        grid = default_grid(cf.variance)
    if not isinstance(grid, GridSpec):
        raise InvalidArgumentError("grid must be a GridSpec")
    return _invert_generic(cf, grid, method)
