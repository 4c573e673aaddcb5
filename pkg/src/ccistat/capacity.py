"""Downlink spectral efficiency under three channel-knowledge assumptions.

All rates are in bits per real channel use:

* ``i_csi``: the receiver knows every fading coefficient and occupancy,
  ``E[1/2 log2(1 + E_0 H_0^2 / (sum Phi_m E_m H_m^2 + s^2))]`` (Monte Carlo).
* ``i_ga``: interference treated as Gaussian noise of matched power,
  ``E[1/2 log2(1 + E_0 H_0^2 / (sum p_m E_m + s^2))]``.
* ``i_p``: mutual information with the true interference law and only the
  desired-link fading known, ``E_H0[h(Y | H_0) - h(Z)] / ln 2``.

Expectations over the desired-link fading ``H_0`` use a trapezoid rule in
``v = ln |h_0|``. The integrand of every estimator is smooth in ``v`` and
decays doubly exponentially for large ``v`` and like ``e^{2v}`` for small
``v``, so the rule converges geometrically; a Gauss-Hermite rule in ``h_0``
does not, because ``log(1 + c h_0^2)`` has a logarithmic kink at ``h_0 = 0``
on the scale ``1/sqrt(c)``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .cci.cf import InterferenceCf
from .cci.density import default_grid
from .cci.inversion import invert_cf
from .errors import InvalidArgumentError, UndefinedRatioError
from .montecarlo import chunk_generator, run_chunks

LOG_STEP = 0.35
LOG_UPPER = math.log(9.0)
LOG_DECADES_BELOW_KNEE = 8.0

# Independent random streams (see montecarlo.chunk_generator).
DESIRED_STREAM = 1
INTERFERER_STREAM = 2
ORACLE_STREAM = 3

MIN_DRAWS = 10_000


@dataclass(frozen=True)
class Estimate:
    """A spectral-efficiency value with its error estimate.

    ``error`` is a Monte Carlo standard error for sampled estimators and a
    grid-refinement delta for the entropy-based estimator.
    """

    value: float
    error: float = 0.0
    method: str = ""

    def __float__(self):
        return self.value


def _powers(budget):
    if hasattr(budget, "interferer_powers"):
        return budget.desired_power, np.asarray(budget.interferer_powers, dtype=np.float64)
    raise InvalidArgumentError("expected a LinkBudget")


def _loading(loading, powers):
    loading = np.broadcast_to(np.asarray(loading, dtype=np.float64), powers.shape)
    if np.any(~((loading >= 0) & (loading <= 1))):
        raise InvalidArgumentError("loading rates must lie in [0, 1]")
    return np.array(loading)


def _check_noise(noise_variance):
    if not noise_variance >= 0:
        raise InvalidArgumentError("noise variance must be non-negative")


def fading_nodes(knee, step=LOG_STEP):
    """Nodes ``t_i`` and weights ``w_i`` with ``E[g(|H_0|)] ~ sum w_i g(t_i)``.

    ``knee`` is the fading amplitude where the integrand changes from
    quadratic growth to logarithmic growth (``sqrt(noise / signal)``); the
    rule starts ``LOG_DECADES_BELOW_KNEE`` e-folds below it.
    """
    if not knee > 0:
        raise InvalidArgumentError("knee must be positive")
    lower = math.log(min(knee, 1.0)) - LOG_DECADES_BELOW_KNEE
    count = int(math.ceil((LOG_UPPER - lower) / step))
    v = LOG_UPPER - step * np.arange(count + 1)[::-1]
    t = np.exp(v)
    weights = step * 2.0 * t * np.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)
    weights[0] *= 0.5
    weights[-1] *= 0.5
    return t, weights


def _knee(desired_power, denominator):
    return math.sqrt(denominator / desired_power)


def _mc_summary(values, method):
    n = values.size
    return Estimate(float(np.mean(values)), float(np.std(values, ddof=1) / math.sqrt(n)), method)


def _chunk_stats(values):
    mean = float(np.mean(values))
    return values.size, mean, float(np.sum(np.square(values - mean)))


def _combine(stats, method):
    """Pool per-chunk ``(count, mean, sum of squared deviations)`` in chunk order."""
    n, mean, m2 = 0, 0.0, 0.0
    for nb, mb, m2b in stats:
        delta = mb - mean
        total = n + nb
        mean += delta * nb / total
        m2 += m2b + delta * delta * n * nb / total
        n = total
    return Estimate(mean, math.sqrt(m2 / (n - 1) / n), method)


def _check_draws(n_mc):
    if int(n_mc) != n_mc or n_mc < MIN_DRAWS:
        raise InvalidArgumentError(f"at least {MIN_DRAWS} Monte Carlo draws are required")
    return int(n_mc)


def i_csi(budget, loading, noise_variance, n_mc=100_000, seed=0, workers=1):
    """Full-CSI spectral efficiency by Monte Carlo.

    The desired-link fading and the interferer variables come from separate
    streams, so the same seed gives the same ``H_0`` draws whatever the
    interferers are; the estimate then decreases pathwise when interference
    is added.
    """
    desired, powers = _powers(budget)
    loading = _loading(loading, powers)
    _check_noise(noise_variance)
    n = _check_draws(n_mc)
    if desired == 0:
        return Estimate(0.0, 0.0, "mc")

    def task(index, start, stop):
        size = stop - start
        h0 = chunk_generator(seed, index, DESIRED_STREAM).standard_normal(size)
        rng = chunk_generator(seed, index, INTERFERER_STREAM)
        denom = np.full(size, float(noise_variance))
        for e, p in zip(powers, loading):
            active = rng.random(size) < p
            h = rng.standard_normal(size)
            denom += np.where(active, e * h * h, 0.0)
        with np.errstate(divide="ignore"):
            snr = desired * h0 * h0 / denom
        return _chunk_stats(0.5 * np.log2(1.0 + snr))

    if noise_variance == 0 and not np.any(powers * loading > 0):
        return Estimate(math.inf, 0.0, "mc")
    return _combine(run_chunks(task, n, workers), "mc")


def i_ga(budget, loading, noise_variance, method="quadrature", n_mc=100_000, seed=0, workers=1):
    """Spectral efficiency under the Gaussian-interference approximation.

    Parameters
    ----------
    method : {"quadrature", "mc"}
        Expectation over ``H_0`` by the log-amplitude trapezoid rule
        (error below 1e-4 bits) or by Monte Carlo with a standard error.
    """
    desired, powers = _powers(budget)
    loading = _loading(loading, powers)
    _check_noise(noise_variance)
    denom = float(np.sum(loading * powers) + noise_variance)
    if desired == 0:
        return Estimate(0.0, 0.0, method)
    if denom == 0:
        return Estimate(math.inf, 0.0, method)
    snr = desired / denom
    if method == "quadrature":
        t, w = fading_nodes(_knee(desired, denom))
        return Estimate(float(np.sum(w * 0.5 * np.log2(1.0 + snr * t * t))), 0.0, method)
    if method != "mc":
        raise InvalidArgumentError(f"unknown method {method!r}; expected 'quadrature' or 'mc'")
    n = _check_draws(n_mc)

    def task(index, start, stop):
        h0 = chunk_generator(seed, index, DESIRED_STREAM).standard_normal(stop - start)
        return _chunk_stats(0.5 * np.log2(1.0 + snr * h0 * h0))

    return _combine(run_chunks(task, n, workers), method)


class _EntropyModel:
    """Densities of ``Z`` and of ``Y`` given each fading node, on refinable grids."""

    def __init__(self, budget, loading, noise_variance):
        desired, powers = _powers(budget)
        self.desired = desired
        self.powers = powers
        self.loading = _loading(loading, powers)
        _check_noise(noise_variance)
        if noise_variance == 0:
            raise InvalidArgumentError("the entropy decomposition needs positive noise variance")
        self.noise = float(noise_variance)
        denom = float(np.sum(self.loading * powers) + noise_variance)
        self.knee = _knee(desired, denom) if desired > 0 else None
        self._cache = {}

    def cf(self, t=None):
        s = self.noise if t is None else self.noise + self.desired * t * t
        return InterferenceCf(self.powers, self.loading, s)

    def nodes(self, step=LOG_STEP):
        return fading_nodes(self.knee, step)

    def density(self, t=None, refine=1):
        cf = self.cf(t)
        grid = default_grid(cf.variance, cf.tail_scale, math.sqrt(cf.gaussian_variance))
        return invert_cf(cf, grid.refined(refine) if refine != 1 else grid)

    def entropy(self, t=None, refine=1):
        key = (t, refine)
        if key not in self._cache:
            self._cache[key] = self.density(t, refine).entropy()
        return self._cache[key]

    def rate(self, refine=1, step=LOG_STEP):
        t, w = self.nodes(step)
        h_z = self.entropy(None, refine)
        gains = np.array([self.entropy(ti, refine) - h_z for ti in t])
        return float(np.sum(w * gains) / math.log(2.0))


def i_p(budget, loading, noise_variance, refine_check=True):
    """Mutual-information spectral efficiency from the entropy decomposition.

    Each conditional density ``f(y | h_0)`` is obtained by inverting its
    characteristic function (interference times a Gaussian of variance
    ``noise + E_0 h_0^2``) and its differential entropy is integrated on the
    inversion grid. With ``refine_check`` the computation is repeated with
    half the density grid spacing and, separately, with half the step of the
    outer fading rule; the larger change is reported as the error.
    """
    model = _EntropyModel(budget, loading, noise_variance)
    if model.desired == 0:
        return Estimate(0.0, 0.0, "entropy")
    value = model.rate()
    error = 0.0
    if refine_check:
        error = max(abs(model.rate(refine=2) - value), abs(model.rate(step=0.5 * LOG_STEP) - value))
    return Estimate(value, error, "entropy")


def i_p_mc_oracle(budget, loading, noise_variance, n_mc=1_000_000, seed=0, workers=1):
    """Direct Monte Carlo estimate of the same mutual information.

    Samples of ``Z`` are drawn from the simulator and ``Y = Z + sqrt(E_0) t X_0``
    is formed at every fading node ``t``; the rate is the weighted mean of
    ``ln f_Z(Z) - ln f_Y(Y | t)`` with both log-densities read from the
    inverted densities. The standard error accounts for the correlation
    between nodes that share the same ``Z`` and ``X_0`` draws.
    """
    from .montecarlo import sample_components

    model = _EntropyModel(budget, loading, noise_variance)
    if model.desired == 0:
        return Estimate(0.0, 0.0, "mc-oracle")
    n = _check_draws(n_mc)
    z = sample_components(model.powers, model.loading, model.noise, 0.0, "Z", n, seed, workers).values
    x0 = np.empty(n)

    def task(index, start, stop):
        x0[start:stop] = chunk_generator(seed, index, ORACLE_STREAM).standard_normal(stop - start)

    run_chunks(task, n, workers)
    nodes, weights = model.nodes()
    total = weights.sum() * model.density(None).log_density(z)
    for t, w in zip(nodes, weights):
        y = z + math.sqrt(model.desired) * t * x0
        total -= w * model.density(t).log_density(y)
    return _mc_summary(total / math.log(2.0), "mc-oracle")


def diff_factors(i_p_value, i_csi_value, i_ga_value):
    """Percentage gaps ``|i_p - i_csi| / i_p`` and ``|i_p - i_ga| / i_p``."""
    i_p_value, i_csi_value, i_ga_value = (float(v) for v in (i_p_value, i_csi_value, i_ga_value))
    if not i_p_value > 0:
        raise UndefinedRatioError("difference factors are undefined when i_p is not positive")
    return (abs(i_p_value - i_csi_value) / i_p_value * 100.0,
            abs(i_p_value - i_ga_value) / i_p_value * 100.0)


@dataclass(frozen=True)
class CapacityReport:
    """All three estimates and their difference factors at one sweep point."""

    d_over_R: float
    p: float
    i_csi: Estimate
    i_ga: Estimate
    i_p: Estimate
    d_csi_pct: float
    d_ga_pct: float

    COLUMNS = ("d_over_R", "p", "i_csi", "i_ga", "i_p", "d_csi_pct", "d_ga_pct",
               "i_csi_stderr", "i_ga_stderr", "i_p_error")

    def row(self):
        return (self.d_over_R, self.p, self.i_csi.value, self.i_ga.value, self.i_p.value,
                self.d_csi_pct, self.d_ga_pct, self.i_csi.error, self.i_ga.error, self.i_p.error)

    def ordered(self, sigmas=3.0):
        """Whether ``i_ga <= i_p <= i_csi`` holds up to ``sigmas`` combined errors."""
        lo = math.hypot(self.i_ga.error, self.i_p.error) * sigmas
        hi = math.hypot(self.i_csi.error, self.i_p.error) * sigmas
        return self.i_ga.value <= self.i_p.value + lo and self.i_p.value <= self.i_csi.value + hi


def capacity_report(budget, loading, noise_variance, d_over_R=math.nan, p=math.nan,
                    n_mc=100_000, seed=0, ga_method="quadrature", refine_check=True, workers=1):
    """Evaluate all estimators for one link budget."""
    csi = i_csi(budget, loading, noise_variance, n_mc, seed, workers)
    ga = i_ga(budget, loading, noise_variance, ga_method, n_mc, seed, workers)
    mi = i_p(budget, loading, noise_variance, refine_check)
    try:
        d_csi, d_ga = diff_factors(mi.value, csi.value, ga.value)
    except UndefinedRatioError:
        d_csi = d_ga = math.nan
    return CapacityReport(float(d_over_R), float(p), csi, ga, mi, d_csi, d_ga)
