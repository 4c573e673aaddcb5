"""Characteristic functions of interference, noise and received signal.

All variables involved are real and symmetric, so every characteristic
function here is real and even in ``w``.
"""

import numpy as np
from scipy.special import binom

from ..errors import InvalidArgumentError

# Order of the 1/w expansion kept for the analytic tail of the inversion.
SERIES_ORDER = 14


class CfEvaluator:
    """An even, real characteristic function with a known atom at zero.

    Parameters
    ----------
    func : callable
        Vectorized ``w -> Psi(w)``.
    atom_mass : float
        Limit of ``Psi(w)`` as ``|w| -> inf`` (probability mass at 0).
    variance : float, optional
        Second moment, used to choose a default grid.
    """

    def __init__(self, func, atom_mass=0.0, variance=None):
        if not 0.0 <= atom_mass <= 1.0:
            raise InvalidArgumentError("atom_mass must lie in [0, 1]")
        self._func = func
        self._atom_mass = float(atom_mass)
        self._variance = None if variance is None else float(variance)

    @property
    def atom_mass(self):
        return self._atom_mass

    @property
    def variance(self):
        return self._variance

    def eval(self, w):
        w = np.asarray(w, dtype=np.float64)
        return np.asarray(self._func(w), dtype=np.float64)

    __call__ = eval


def _check_powers(powers, loading):
    powers = np.asarray(powers, dtype=np.float64).reshape(-1)
    loading = np.asarray(loading, dtype=np.float64).reshape(-1)
    if loading.size == 1 and powers.size != 1:
        loading = np.full(powers.size, float(loading[0]))
    if powers.shape != loading.shape:
        raise InvalidArgumentError(
            f"{powers.size} interferer powers but {loading.size} loading rates")
    if np.any(~(powers >= 0)):
        raise InvalidArgumentError("interferer powers must be non-negative")
    if np.any(~((loading >= 0) & (loading <= 1))):
        raise InvalidArgumentError("loading rates must lie in [0, 1]")
    return powers, loading


def _psi_series(power, order=SERIES_ORDER):
    """Coefficients of ``(1 + E w^2)^(-1/2)`` in powers of ``u = 1/w``."""
    coef = np.zeros(order + 1)
    for j in range(order // 2 + 1):
        n = 2 * j + 1
        if n > order:
            break
        coef[n] = binom(-0.5, j) * power ** (-j - 0.5)
    return coef


class InterferenceCf(CfEvaluator):
    """``exp(-s w^2 / 2) * prod_m (p_m (1 + E_m w^2)^(-1/2) + 1 - p_m)``.

    With ``s = 0`` this is the aggregate interference; ``s = noise`` adds the
    thermal noise and ``s = noise + E_0 h_0^2`` gives the received signal
    conditioned on the desired-link fading.

    Expanding the product over subsets of active interferers, the empty subset
    contributes the constant ``prod (1 - p_m)`` (the atom) and each singleton
    ``c_m (1 + E_m w^2)^(-1/2)`` with ``c_m = p_m prod_{k != m} (1 - p_k)``
    (a scaled K0 density). Everything else decays at least like ``w^-2``.
    """

    def __init__(self, powers, loading, gaussian_variance=0.0):
        powers, loading = _check_powers(powers, loading)
        if not gaussian_variance >= 0:
            raise InvalidArgumentError("Gaussian variance must be non-negative")
        active = (powers > 0) & (loading > 0)
        self.powers = powers
        self.loading = loading
        self.gaussian_variance = float(gaussian_variance)
        self.active_powers = powers[active]
        self.active_loading = loading[active]
        idle = 1.0 - self.active_loading
        prefix = np.concatenate([[1.0], np.cumprod(idle)])
        suffix = np.concatenate([np.cumprod(idle[::-1])[::-1], [1.0]])
        self.single_coefficients = self.active_loading * prefix[:-1] * suffix[1:]
        self.interference_atom = float(prefix[-1])
        variance = float(np.sum(self.active_loading * self.active_powers) + self.gaussian_variance)
        atom = self.interference_atom if self.gaussian_variance == 0 else 0.0
        super().__init__(self._evaluate, atom, variance)

    @property
    def tail_scale(self):
        """Largest ``sqrt(E_m)`` among active interferers (slowest tail decay)."""
        return float(np.sqrt(self.active_powers.max())) if self.active_powers.size else 0.0

    @property
    def num_active(self):
        return self.active_powers.size

    def product(self, w):
        """The interference product without the Gaussian factor."""
        w2 = np.square(np.asarray(w, dtype=np.float64))
        out = np.ones_like(w2)
        for e, p in zip(self.active_powers, self.active_loading):
            out *= p / np.sqrt(1.0 + e * w2) + (1.0 - p)
        return out

    def _evaluate(self, w):
        out = self.product(w)
        if self.gaussian_variance > 0:
            out *= np.exp(-0.5 * self.gaussian_variance * np.square(w))
        return out

    def remainder(self, w):
        """Product minus its atom and singleton terms (decays like ``w^-2``)."""
        w2 = np.square(np.asarray(w, dtype=np.float64))
        out = self.product(w) - self.interference_atom
        for c, e in zip(self.single_coefficients, self.active_powers):
            out -= c / np.sqrt(1.0 + e * w2)
        return out

    def remainder_series(self, order=SERIES_ORDER):
        """Coefficients ``r_n`` with ``remainder(w) = sum_n r_n w^-n`` for large ``w``.

        Converges for ``w > 1 / sqrt(min E_m)``; ``r_0 = r_1 = 0``.
        """
        poly = np.zeros(order + 1)
        poly[0] = 1.0
        singles = []
        for e, p in zip(self.active_powers, self.active_loading):
            psi = _psi_series(e, order)
            singles.append(psi)
            factor = p * psi
            factor[0] += 1.0 - p
            poly = np.convolve(poly, factor)[:order + 1]
        poly[0] -= self.interference_atom
        for c, psi in zip(self.single_coefficients, singles):
            poly -= c * psi
        poly[:2] = 0.0
        return poly

    def with_gaussian(self, gaussian_variance):
        return InterferenceCf(self.powers, self.loading, gaussian_variance)


def cf_single_cci(w, power, loading):
    """Characteristic function of one interferer, ``p (1 + E w^2)^(-1/2) + 1 - p``."""
    if not power >= 0:
        raise InvalidArgumentError("power must be non-negative")
    if not 0 <= loading <= 1:
        raise InvalidArgumentError("loading rate must lie in [0, 1]")
    w = np.asarray(w, dtype=np.float64)
    return loading / np.sqrt(1.0 + power * w * w) + (1.0 - loading)


def total_cf(budget, loading, noise_variance=0.0, desired_term=None):
    """Build the :class:`InterferenceCf` for a link budget.

    ``desired_term`` is ``E_0 h_0^2`` when conditioning the received signal on
    the desired-link fading; it is added to the Gaussian variance.
    """
    if not noise_variance >= 0:
        raise InvalidArgumentError("noise variance must be non-negative")
    gaussian = float(noise_variance)
    if desired_term is not None:
        if not desired_term >= 0:
            raise InvalidArgumentError("desired term must be non-negative")
        gaussian += float(desired_term)
    powers = budget.interferer_powers if hasattr(budget, "interferer_powers") else budget
    return InterferenceCf(powers, loading, gaussian)


def cf_total(w, budget, loading, noise_variance=0.0, desired_term=None):
    """Evaluate the total characteristic function at ``w``.

    Interference only when ``noise_variance == 0`` and no desired term,
    interference plus noise when ``noise_variance > 0``, and the received
    signal given the desired fading when ``desired_term`` is set.
    """
    return total_cf(budget, loading, noise_variance, desired_term).eval(w)
