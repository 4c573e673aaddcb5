"""Closed-form interference densities for full loading.

Two equal-power interferers sum to a Laplace law, so ``M = 2n`` equal powers
have characteristic function ``(1 + E w^2)^-n`` whose inverse is a Laplace
kernel times a polynomial in ``|x|``. Unequal pairs (the three-cell corner,
where the six first-tier interferers come in three equal-power pairs) are
handled by partial fractions in ``w^2``.
"""

import logging
import math

import numpy as np

from ..errors import InvalidArgumentError
from .density import NumericPdf, default_grid
from .special import k0_cell_average, k0_density

log = logging.getLogger(__name__)

MERGE_RTOL = 1e-6


def laplace_power_density(x, power, n):
    """Inverse transform of ``(1 + E w^2)^-n`` for integer ``n >= 1``."""
    if not power > 0:
        raise InvalidArgumentError("power must be positive")
    if int(n) != n or n < 1:
        raise InvalidArgumentError("n must be a positive integer")
    n = int(n)
    scale = math.sqrt(power)
    ax = np.abs(np.asarray(x, dtype=np.float64)) / scale
    poly = np.zeros_like(ax)
    for k in range(n):
        coef = math.factorial(2 * n - k - 2) / (math.factorial(k) * math.factorial(n - k - 1))
        poly += coef * (2.0 * ax) ** k
    norm = 2.0 ** (2 * n - 1) * math.factorial(n - 1) * scale
    return np.exp(-ax) * poly / norm


def equal_power_density(x, num_interferers, power):
    """Density of ``num_interferers`` in {1, 2, 4, 6} fully loaded equal-power interferers."""
    if num_interferers == 1:
        return k0_density(x, power)
    if num_interferers in (2, 4, 6):
        return laplace_power_density(x, power, num_interferers // 2)
    raise InvalidArgumentError(
        f"no closed form for M = {num_interferers}; supported: 1, 2, 4, 6 (use invert_cf otherwise)")


def three_pair_coefficients(e1, e2, e3):
    """Partial-fraction weights ``a_m = E_m^2 / prod_{k != m} (E_m - E_k)``; they sum to 1."""
    e = (float(e1), float(e2), float(e3))
    out = []
    for m in range(3):
        num = e[m] * e[m]
        den = 1.0
        for k in range(3):
            if k != m:
                den *= e[m] - e[k]
        out.append(num / den)
    return tuple(out)


def _group_powers(powers, rtol):
    """Cluster powers whose relative gap is below ``rtol``; returns (power, multiplicity)."""
    ordered = sorted(float(p) for p in powers)
    groups = [[ordered[0]]]
    for p in ordered[1:]:
        ref = groups[-1][-1]
        if abs(p - ref) <= rtol * max(abs(p), abs(ref)):
            groups[-1].append(p)
        else:
            groups.append([p])
    return [(float(np.mean(g)), len(g)) for g in groups]


def partial_fractions(powers, merge_rtol=MERGE_RTOL):
    """Expand ``prod_i 1 / (1 + E_i z)`` as ``sum A / (1 + E z)^k``.

    Powers closer than ``merge_rtol`` (relative) are merged into a repeated
    factor. Returns a list of ``(E, k, A)`` triples.
    """
    groups = _group_powers(powers, merge_rtol)
    terms = []
    for i, (ei, ni) in enumerate(groups):
        # prod_{j != i} (E_i / (E_i - E_j + E_j y))^{n_j} expanded in y = 1 + E_i z
        series = np.zeros(ni)
        series[0] = 1.0
        for j, (ej, nj) in enumerate(groups):
            if j == i:
                continue
            d = ei - ej
            factor = np.array([math.comb(nj + r - 1, r) * (-ej / d) ** r for r in range(ni)])
            factor *= (ei / d) ** nj
            series = np.convolve(series, factor)[:ni]
        for k in range(1, ni + 1):
            terms.append((ei, k, float(series[ni - k])))
    return terms


def three_pair_density(x, powers, merge_rtol=MERGE_RTOL):
    """Density of three equal-power pairs with pair powers ``powers``.

    ``sum_m a_m / (2 sqrt(E_m)) exp(-|x| / sqrt(E_m))`` for well-separated
    powers; near-equal powers use the merged repeated-factor forms.
    """
    terms = partial_fractions(powers, merge_rtol)
    out = np.zeros(np.shape(x))
    for e, k, a in terms:
        out += a * laplace_power_density(x, e, k)
    return out


def _grid_for(variance, tail_power, grid):
    return grid if grid is not None else default_grid(variance, math.sqrt(tail_power))


def pdf_single_cci(power, loading, grid=None):
    """Single-interferer law: ``p`` times a K0 density plus an atom ``1 - p`` at zero."""
    if not power > 0:
        raise InvalidArgumentError("power must be positive")
    if not 0 <= loading <= 1:
        raise InvalidArgumentError("loading rate must lie in [0, 1]")
    grid = _grid_for(max(loading, 1e-12) * power, power, grid)
    x = grid.points()
    f = np.zeros_like(x)
    if loading > 0:
        c = x.size // 2
        f = k0_density(x, power)
        f[c] = k0_cell_average(0.5 * grid.dx, power)
        f *= loading
    return NumericPdf(x, f, 1.0 - loading, loading > 0)


def pdf_equal_power(num_interferers, power, grid=None):
    """Closed-form law of ``num_interferers`` in {1, 2, 4, 6} equal-power, fully loaded interferers."""
    if num_interferers == 1:
        return pdf_single_cci(power, 1.0, grid)
    if num_interferers not in (2, 4, 6):
        raise InvalidArgumentError(
            f"no closed form for M = {num_interferers}; supported: 1, 2, 4, 6 (use invert_cf otherwise)")
    if not power > 0:
        raise InvalidArgumentError("power must be positive")
    grid = _grid_for(num_interferers * power, power, grid)
    x = grid.points()
    return NumericPdf(x, laplace_power_density(x, power, num_interferers // 2))


def pdf_three_pair(e1, e2, e3, grid=None, merge_rtol=MERGE_RTOL):
    """Closed-form law at the three-cell corner: three equal-power interferer pairs."""
    powers = (float(e1), float(e2), float(e3))
    if not all(p > 0 for p in powers):
        raise InvalidArgumentError("pair powers must be positive")
    groups = _group_powers(powers, merge_rtol)
    diagnostics = {}
    if len(groups) < 3:
        diagnostics["merged_groups"] = len(groups)
        log.info("pair powers %s within relative gap %g; using merged limit form", powers, merge_rtol)
    grid = _grid_for(2.0 * sum(powers), max(powers), grid)
    x = grid.points()
    return NumericPdf(x, three_pair_density(x, powers, merge_rtol), diagnostics=diagnostics)
