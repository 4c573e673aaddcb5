"""Sample-level simulation of the received signal and binned laws.

Each sample draws the occupancy ``Phi_m ~ Bernoulli(p_m)`` and independent
real standard normal fading ``H_m`` and symbols ``X_m`` for every
interferer, then forms

    I = sum_m Phi_m sqrt(E_m) H_m X_m,   Z = I + N,   Y = Z + sqrt(E_0) H_0 X_0.

Random streams
--------------
The sample count is cut into fixed chunks of ``CHUNK_SIZE`` draws. Chunk
``k`` gets its own Philox generator seeded by
``SeedSequence(seed, spawn_key=(k,))``, so a batch depends only on
``(seed, n)`` and never on how many workers produced it. Inside a chunk the
interference terms are drawn first, then the noise, then the desired
signal; an ``I`` batch is therefore the interference part of the ``Z`` and
``Y`` batches with the same seed.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .cci.density import GridSpec, default_grid, write_density_csv
from .errors import InvalidArgumentError

CHUNK_SIZE = 1 << 18
TAGS = ("I", "Z", "Y")
DEFAULT_BINS = 401
DEFAULT_SPAN = 8.0


@dataclass(frozen=True)
class SampleBatch:
    """Samples of one component of the received signal."""

    values: np.ndarray
    seed: int
    component_tag: str

    @property
    def count(self):
        return int(self.values.size)

    def mean(self):
        return float(np.mean(self.values))

    def variance(self):
        return float(np.var(self.values))


def _check_tag(tag):
    if tag not in TAGS:
        raise InvalidArgumentError(f"unknown component tag {tag!r}; expected one of {TAGS}")


def chunk_generator(seed, chunk_index, stream=0):
    """Philox generator of chunk ``chunk_index`` in stream ``stream``.

    Stream 0 is used for signal samples; other modules use separate streams
    so their draws never overlap.
    """
    key = (int(chunk_index),) if stream == 0 else (int(stream), int(chunk_index))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=key)))


def chunk_sizes(n):
    full, rest = divmod(int(n), CHUNK_SIZE)
    return [CHUNK_SIZE] * full + ([rest] if rest else [])


def _draw_chunk(out, powers, loading, noise_sd, desired_sd, tag, seed, index):
    rng = chunk_generator(seed, index)
    size = out.size
    out.fill(0.0)
    for e, p in zip(powers, loading):
        active = rng.random(size) < p
        h = rng.standard_normal(size)
        x = rng.standard_normal(size)
        out += np.where(active, math.sqrt(e) * h * x, 0.0)
    if tag in ("Z", "Y"):
        out += noise_sd * rng.standard_normal(size)
    if tag == "Y":
        out += desired_sd * rng.standard_normal(size) * rng.standard_normal(size)


def run_chunks(task, n, workers=1):
    """Call ``task(index, start, stop)`` for each chunk, optionally on threads.

    NumPy's generators release the GIL while filling arrays, so threads give
    real parallelism; results are written into disjoint slices and thus do
    not depend on completion order.
    """
    bounds = np.concatenate([[0], np.cumsum(chunk_sizes(n))]).astype(np.int64)
    jobs = [(i, int(bounds[i]), int(bounds[i + 1])) for i in range(bounds.size - 1)]
    if workers is None or workers <= 1 or len(jobs) <= 1:
        return [task(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=int(workers)) as pool:
        return list(pool.map(lambda job: task(*job), jobs))


def sample_components(powers, loading, noise_variance=0.0, desired_power=0.0,
                      tag="I", n=100_000, seed=0, workers=1):
    """Draw ``n`` samples of ``I``, ``Z`` or ``Y`` from mean received powers.

    Parameters
    ----------
    powers, loading : array_like
        Interferer powers ``E_m`` and loading rates ``p_m``.
    noise_variance : float
        Thermal noise variance (used for ``Z`` and ``Y``).
    desired_power : float
        ``E_0`` (used for ``Y``).
    tag : {"I", "Z", "Y"}
    n : int
    seed : int
    workers : int
        Threads used for sampling; the result does not depend on it.
    """
    _check_tag(tag)
    powers = np.asarray(powers, dtype=np.float64).reshape(-1)
    loading = np.broadcast_to(np.asarray(loading, dtype=np.float64), powers.shape)
    if np.any(~(powers >= 0)) or np.any(~((loading >= 0) & (loading <= 1))):
        raise InvalidArgumentError("powers must be non-negative and loading rates in [0, 1]")
    if not (noise_variance >= 0 and desired_power >= 0):
        raise InvalidArgumentError("variances must be non-negative")
    if int(n) != n or n < 1:
        raise InvalidArgumentError("sample count must be a positive integer")
    if int(seed) != seed or seed < 0:
        raise InvalidArgumentError("seed must be a non-negative integer")
    values = np.empty(int(n))
    noise_sd = math.sqrt(noise_variance)
    desired_sd = math.sqrt(desired_power)

    def task(index, start, stop):
        _draw_chunk(values[start:stop], powers, loading, noise_sd, desired_sd, tag, seed, index)

    run_chunks(task, n, workers)
    return SampleBatch(values, int(seed), tag)


def sample(scenario, ms_position, tag, n, seed, workers=1):
    """Sample ``I``, ``Z`` or ``Y`` for a mobile station at ``ms_position``."""
    from .geometry import link_budget

    budget = link_budget(scenario, ms_position)
    return sample_components(budget.interferer_powers, scenario.loading_rates,
                             scenario.noise_variance, budget.desired_power, tag, n, seed, workers)


def symmetric_edges(sd, bins=DEFAULT_BINS, span=DEFAULT_SPAN):
    """``bins`` uniform bins over ``[-span sd, span sd]``.

    With an odd bin count zero sits at the center of the middle bin.
    """
    if not sd > 0:
        raise InvalidArgumentError("standard deviation must be positive")
    if int(bins) != bins or bins < 10:
        raise InvalidArgumentError("at least 10 bins are required")
    bins = int(bins)
    # half-integer multiples of the width: exactly antisymmetric, zero-centred middle bin
    return (np.arange(bins + 1) - 0.5 * bins) * (2.0 * span * sd / bins)


@dataclass(frozen=True)
class EmpiricalPdf:
    """Normalized histogram with out-of-range samples folded into the end bins."""

    edges: np.ndarray
    probabilities: np.ndarray
    count: int
    below: int = 0
    above: int = 0
    outside_moment: float = None
    metadata: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def centers(self):
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    @property
    def widths(self):
        return np.diff(self.edges)

    @property
    def density(self):
        return self.probabilities / self.widths

    @property
    def out_of_range(self):
        """Fraction of samples that fell outside the edges."""
        return (self.below + self.above) / self.count

    def variance(self):
        """Second moment of the sampled law about zero.

        In-range bins contribute their centers' second moment with
        Sheppard's correction. Out-of-range samples contribute their exact
        second moment (``outside_moment``) when it was recorded, and
        otherwise sit at the centers of the end bins they were folded into.
        """
        p = self.probabilities.copy()
        outside = 0.0
        if self.outside_moment is not None:
            p[0] -= self.below / self.count
            p[-1] -= self.above / self.count
            outside = self.outside_moment
        c = self.centers
        inside = float(np.sum(p * c * c)) - float(np.sum(p * self.widths ** 2)) / 12.0
        return inside + outside

    def expected_counts(self, masses):
        return self.count * np.asarray(masses, dtype=np.float64)

    def binomial_z(self, masses):
        """Standardized differences against reference bin masses."""
        masses = np.asarray(masses, dtype=np.float64)
        sd = np.sqrt(self.count * masses * (1.0 - masses))
        with np.errstate(divide="ignore", invalid="ignore"):
            z = (self.count * self.probabilities - self.count * masses) / sd
        return np.where(sd > 0, z, 0.0)

    def to_csv(self, stream=None, metadata=None):
        """Bin centers and densities in the same layout as a tabulated density."""
        meta = {"atom_mass": 0.0, "bins": self.probabilities.size, "count": self.count,
                "below": self.below, "above": self.above,
                "x_min": float(self.edges[0]), "x_max": float(self.edges[-1])}
        meta.update(self.metadata)
        meta.update(metadata or {})
        return write_density_csv(stream, self.centers, self.density, meta)


def empirical_pdf(batch, bins=DEFAULT_BINS, range=None):
    """Histogram of a batch.

    Parameters
    ----------
    batch : SampleBatch or array_like
    bins : int or array_like
        Bin count (uniform bins over ``range``) or explicit uniform edges.
    range : (float, float), optional
        Defaults to ``DEFAULT_SPAN`` sample standard deviations either side
        of zero.
    """
    values = batch.values if isinstance(batch, SampleBatch) else np.asarray(batch, dtype=np.float64)
    if values.size == 0:
        raise InvalidArgumentError("cannot build a histogram from an empty batch")
    if np.ndim(bins) == 1:
        edges = np.asarray(bins, dtype=np.float64)
        widths = np.diff(edges)
        if edges.size < 11 or not np.allclose(widths, widths[0], rtol=1e-9):
            raise InvalidArgumentError("explicit edges must be uniform with at least 10 bins")
    else:
        if int(bins) != bins or bins < 10:
            raise InvalidArgumentError("at least 10 bins are required")
        if range is None:
            sd = float(np.std(values))
            half = DEFAULT_SPAN * sd if sd > 0 else 1.0
            range = (-half, half)
        lo, hi = float(range[0]), float(range[1])
        if not hi > lo:
            raise InvalidArgumentError("histogram range must be increasing")
        edges = np.linspace(lo, hi, int(bins) + 1)
    nbins = edges.size - 1
    lo, hi = edges[0], edges[-1]
    out_low, out_high = values < lo, values >= hi
    below, above = int(np.count_nonzero(out_low)), int(np.count_nonzero(out_high))
    outside = values[out_low | out_high]
    outside_moment = float(np.dot(outside, outside)) / values.size
    index = np.floor((values - lo) * (nbins / (hi - lo))).astype(np.int64)
    np.clip(index, 0, nbins - 1, out=index)
    counts = np.bincount(index, minlength=nbins).astype(np.float64)
    meta = {}
    if isinstance(batch, SampleBatch):
        meta = {"seed": batch.seed, "component": batch.component_tag}
    return EmpiricalPdf(edges, counts / values.size, int(values.size), below, above, outside_moment, meta)


def gaussian_bin_masses(edges, variance):
    """Bin masses of ``Normal(0, variance)`` with the tails folded into the end bins."""
    edges = np.asarray(edges, dtype=np.float64)
    if not variance > 0:
        raise InvalidArgumentError("variance must be positive")
    z = edges / math.sqrt(variance)
    cdf, sf = ndtr(z), ndtr(-z)
    # differences of the upper tail's survival function keep their precision
    masses = np.where(z[1:] <= 0.0, np.diff(cdf), -np.diff(sf))
    masses[0] += cdf[0]
    masses[-1] += sf[-1]
    return masses


def law_bin_masses(law, edges):
    """Bin masses of a tabulated density, a histogram, or raw probabilities."""
    if isinstance(law, EmpiricalPdf):
        if law.edges.shape != np.shape(edges) or not np.allclose(law.edges, edges):
            raise InvalidArgumentError("histogram edges differ from the requested edges")
        return law.probabilities
    if hasattr(law, "bin_masses"):
        return law.bin_masses(edges)
    return np.asarray(law, dtype=np.float64)


def kl_distance(f, g):
    """Kullback-Leibler distance ``sum f_i ln(f_i / g_i)`` in nats between binned laws.

    Returns ``inf`` when some bin has ``f_i > 0`` and ``g_i = 0``.
    """
    f = np.asarray(getattr(f, "probabilities", f), dtype=np.float64)
    g = np.asarray(getattr(g, "probabilities", g), dtype=np.float64)
    if f.shape != g.shape:
        raise InvalidArgumentError("laws must be discretized on the same bins")
    if np.any(f < 0) or np.any(g < 0):
        raise InvalidArgumentError("bin probabilities must be non-negative")
    support = f > 0
    if np.any(support & (g == 0)):
        return math.inf
    ratio = f[support] / g[support]
    return max(float(np.sum(f[support] * np.log(ratio))), 0.0)


def kl_to_gaussian(law, variance, edges=None, bins=DEFAULT_BINS, span=DEFAULT_SPAN):
    """KL distance from a law to the zero-mean Gaussian of the given variance.

    Both laws are discretized on ``edges`` (default: ``bins`` uniform bins
    over ``span`` standard deviations); any atom at zero is assigned to the
    bin containing zero.
    """
    if edges is None:
        edges = symmetric_edges(math.sqrt(variance), bins, span)
    return kl_distance(law_bin_masses(law, edges), gaussian_bin_masses(edges, variance))


def aligned_grid(cf, edges, min_subdivisions=5):
    """Inversion grid whose cells tile the bins and which covers the law's tails.

    The spacing is a whole fraction of the bin width, small enough to give
    four points per standard deviation of any Gaussian factor; the half-width
    is at least the default grid's.
    """
    edges = np.asarray(edges, dtype=np.float64)
    width = float(edges[1] - edges[0])
    base = default_grid(cf.variance, getattr(cf, "tail_scale", 0.0),
                        math.sqrt(getattr(cf, "gaussian_variance", 0.0)))
    sub = max(int(min_subdivisions), int(math.ceil(width / base.dx - 1e-9)))
    if sub % 2 == 0:
        sub += 1
    return GridSpec.for_bins(edges, sub, base.x_max)


def analytic_bin_masses(cf, edges, min_subdivisions=5):
    """Bin masses of a characteristic function's law, atom in the zero bin."""
    from .cci.inversion import invert_cf

    return invert_cf(cf, aligned_grid(cf, edges, min_subdivisions)).bin_masses(edges)
