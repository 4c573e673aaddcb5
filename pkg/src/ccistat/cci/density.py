"""Symmetric densities sampled on uniform grids, with an explicit atom at zero."""

import io
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicSpline

from ..errors import InvalidArgumentError, InversionError

NORMALIZATION_TOL = 1e-3

# Log-density floor used when scoring samples against tabulated densities.
_LOG_FLOOR = -745.0



@dataclass(frozen=True)
class GridSpec:
    """Uniform grid ``k * dx`` for ``|k| <= ceil(x_max / dx)``."""

    dx: float
    x_max: float

    def __post_init__(self):
        if not (self.dx > 0 and self.x_max > 0):
            raise InvalidArgumentError("grid spacing and half-width must be positive")

    @property
    def half_points(self):
        return int(math.ceil(self.x_max / self.dx - 1e-9))

    def points(self):
        n = self.half_points
        return self.dx * np.arange(-n, n + 1)

    def nonnegative_points(self):
        return self.dx * np.arange(self.half_points + 1)

    def refined(self, factor=2):
        return GridSpec(self.dx / factor, self.x_max)

    @classmethod
    def for_bins(cls, edges, subdivisions=5, x_max=None):
        """Grid whose cells tile symmetric, uniform, zero-centered bins exactly.

        The bins must have an odd count so that zero is a bin center. The
        grid may extend beyond the outer edge (``x_max``) so that tail mass
        is resolved before being folded into the end bins.
        """
        edges = np.asarray(edges, dtype=np.float64)
        width = edges[1] - edges[0]
        if (edges.size - 1) % 2 == 0 or not math.isclose(edges[0], -edges[-1], rel_tol=1e-12):
            raise InvalidArgumentError("bins must be symmetric about zero with an odd count")
        if int(subdivisions) != subdivisions or subdivisions < 1 or subdivisions % 2 == 0:
            raise InvalidArgumentError("subdivisions must be a positive odd integer")
        return cls(width / subdivisions, max(float(edges[-1]), float(x_max or 0.0)))


def default_grid(variance, tail_scale=0.0, gaussian_sd=0.0):
    """Spacing ``0.01 sd`` and half-width ``max(12 sd, 30 tail_scale + 8 gaussian_sd)``.

    ``tail_scale`` is the slowest exponential decay length of the density
    (``sqrt(E_max)``); ``gaussian_sd`` caps the spacing so a narrow Gaussian
    component still gets four points per standard deviation.
    """
    sd = math.sqrt(variance)
    if not sd > 0:
        raise InvalidArgumentError("cannot build a default grid for a zero-variance law")
    dx = 0.01 * sd
    if gaussian_sd > 0:
        dx = min(dx, 0.25 * gaussian_sd)
    x_max = max(12.0 * sd, 30.0 * tail_scale + 8.0 * gaussian_sd)
    return GridSpec(dx, x_max)


@dataclass(frozen=True)
class NumericPdf:
    """Density values on a symmetric uniform grid plus a point mass at zero.

    When ``singular`` is true the density has an integrable logarithmic
    singularity at zero and ``density`` at ``x = 0`` holds the average over
    the central cell ``[-dx/2, dx/2]`` instead of the (infinite) point value.
    """

    x: np.ndarray
    density: np.ndarray
    atom_mass: float = 0.0
    singular: bool = False
    diagnostics: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        f = np.asarray(self.density, dtype=np.float64)
        if x.ndim != 1 or x.shape != f.shape or x.size < 3 or x.size % 2 == 0:
            raise InvalidArgumentError("x and density must be equal-length odd-sized vectors")
        if not 0.0 <= self.atom_mass <= 1.0 + NORMALIZATION_TOL:
            raise InvalidArgumentError("atom_mass must lie in [0, 1]")
        x.flags.writeable = False
        f.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "density", f)
        object.__setattr__(self, "atom_mass", float(self.atom_mass))

    @property
    def dx(self):
        return float(self.x[1] - self.x[0])

    @property
    def x_max(self):
        return float(self.x[-1])

    @property
    def grid(self):
        return GridSpec(self.dx, self.x_max)

    @property
    def center(self):
        return self.x.size // 2

    def continuous_mass(self):
        return float(np.trapezoid(self.density, dx=self.dx))

    def mass(self):
        return self.atom_mass + self.continuous_mass()

    def variance(self):
        """Second moment (the law is symmetric, so also the variance)."""
        return float(np.trapezoid(self.x * self.x * self.density, dx=self.dx))

    def entropy(self):
        """Differential entropy ``-int f ln f`` in nats."""
        if self.atom_mass > 0:
            raise InvalidArgumentError("differential entropy is undefined for a law with an atom")
        f = self.density
        pos = f > 0
        integrand = np.zeros_like(f)
        integrand[pos] = -f[pos] * np.log(f[pos])
        return float(np.trapezoid(integrand, dx=self.dx))

    def check(self, tol=NORMALIZATION_TOL):
        """Raise :class:`InversionError` unless the law is normalized within ``tol``."""
        total = self.mass()
        if not abs(total - 1.0) <= tol:
            diag = dict(self.diagnostics)
            diag["normalization"] = total
            raise InversionError("density is not normalized", diag)
        if np.any(self.density < 0):
            raise InversionError("density has negative values", dict(self.diagnostics))
        return self

    @cached_property
    def _log_spline(self):
        f = self.density.copy()
        if self.singular:
            f[self.center] = 0.5 * (f[self.center - 1] + f[self.center + 1])
        with np.errstate(divide="ignore"):
            logf = np.log(f)
        logf = np.maximum(logf, _LOG_FLOOR)
        return CubicSpline(self.x, logf)

    def log_density(self, x):
        """Log-density at arbitrary points.

        Cubic spline of ``ln f`` inside the grid and linear extrapolation of
        ``ln f`` (an exponential tail) outside it.
        """
        x = np.asarray(x, dtype=np.float64)
        spline = self._log_spline
        out = spline(np.clip(x, self.x[0], self.x[-1]))
        k = max(self.center // 20, 1)
        slope = (spline(self.x[-1]) - spline(self.x[-1 - k])) / (k * self.dx)
        slope = min(float(slope), 0.0)
        beyond = np.abs(x) > self.x_max
        out = np.where(beyond, spline(self.x_max) + slope * (np.abs(x) - self.x_max), out)
        return out

    def evaluate(self, x):
        """Density at arbitrary points by linear interpolation (0 outside the grid)."""
        return np.interp(x, self.x, self.density, left=0.0, right=0.0)

    def bin_masses(self, edges):
        """Probability of each bin ``[edges[i], edges[i+1])``.

        Grid cell ``k`` (width ``dx`` centered on ``x_k``) carries mass
        ``dx * density[k]``; bins are accumulated from cells, the atom goes to
        the bin containing zero, and mass outside the edges (including any
        mass beyond the grid) is folded into the end bins.

        Cell masses come from :meth:`cell_masses`. Any shortfall of their sum
        from one is mass beyond the grid and goes to the end bins. For a
        log-singular law only the exponentially extrapolated tail goes there;
        the residual of either sign is quadrature error next to the
        singularity and goes to the bin containing zero.
        """
        edges = np.asarray(edges, dtype=np.float64)
        if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
            raise InvalidArgumentError("bin edges must be strictly increasing")
        dx = self.dx
        bounds = np.concatenate([self.x - 0.5 * dx, [self.x[-1] + 0.5 * dx]])
        cumulative = np.concatenate([[0.0], np.cumsum(self.cell_masses())])
        deficit = 1.0 - self.atom_mass - cumulative[-1]
        if self.singular:
            beyond = min(max(deficit, 0.0), self.tail_beyond_grid())
        else:
            beyond = deficit = max(deficit, 0.0)
        at_edges = np.interp(edges, bounds, cumulative) + 0.5 * beyond
        masses = np.diff(at_edges)
        masses[0] += at_edges[0]
        masses[-1] += (cumulative[-1] + beyond) - at_edges[-1]
        zero_bin = int(np.clip(np.searchsorted(edges, 0.0, side="right") - 1, 0, masses.size - 1))
        masses[zero_bin] += self.atom_mass + (deficit - beyond)
        return masses

    def cell_masses(self):
        """Mass of each grid cell ``[x_k - dx/2, x_k + dx/2]``.

        ``dx * density`` for regular laws. A log-singular law is split as
        ``f = a (-ln|x|) + g`` with ``a`` estimated from the first two grid
        values beside zero; the log part gets its exact cell average and the
        smooth part ``g`` the midpoint-rule curvature correction. The central
        value is already a cell average and is used as is.
        """
        f = self.density
        masses = f * self.dx
        if not self.singular or f.size < 7:
            return masses
        c = self.center
        k = np.abs(np.arange(f.size) - c).astype(np.float64)
        k[c] = 1.0
        log_coef = max(f[c + 1] - f[c + 2], 0.0) / math.log(2.0)
        # mean of -ln t over [k - 1/2, k + 1/2] minus -ln k
        upper, lower = k + 0.5, k - 0.5
        log_gap = 1.0 - (upper * np.log(upper) - lower * np.log(lower)) + np.log(k)
        g = f + log_coef * np.log(k)
        curvature = np.zeros_like(f)
        curvature[1:-1] = (g[2:] - 2.0 * g[1:-1] + g[:-2]) / 24.0
        correction = log_coef * log_gap + curvature
        correction[c - 1:c + 2] = [log_coef * log_gap[c - 1], 0.0, log_coef * log_gap[c + 1]]
        return masses + self.dx * correction

    def tail_beyond_grid(self):
        """Two-sided mass beyond the last grid cell, from an exponential fit to the edge."""
        k = max(self.center // 20, 1)
        f_end, f_in = self.density[-1], self.density[-1 - k]
        if not (f_end > 0 and f_in > f_end):
            return 0.0
        decay = k * self.dx / math.log(f_in / f_end)
        return float(2.0 * f_end * decay * math.exp(-0.5 * self.dx / decay))

    def to_csv(self, stream=None, metadata=None):
        """Write ``x,density`` rows after ``#`` header lines; returns text if no stream."""
        meta = {"atom_mass": self.atom_mass, "dx": self.dx, "x_max": self.x_max,
                "points": self.x.size, "singular": int(self.singular)}
        meta.update(metadata or {})
        return write_density_csv(stream, self.x, self.density, meta)

    @classmethod
    def from_csv(cls, stream):
        meta, x, f = read_density_csv(stream)
        return cls(x, f, float(meta.get("atom_mass", 0.0)), bool(int(meta.get("singular", 0))))


def write_density_csv(stream, x, density, metadata):
    own = stream is None
    out = io.StringIO() if own else stream
    out.write("# ccistat density\n")
    for key, value in metadata.items():
        out.write(f"# {key}={_fmt(value)}\n")
    out.write("x,density\n")
    for xi, fi in zip(x, density):
        out.write(f"{_fmt(xi)},{_fmt(fi)}\n")
    return out.getvalue() if own else None


def read_density_csv(stream):
    text = stream.read() if hasattr(stream, "read") else str(stream)
    meta, rows = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, value = body.split("=", 1)
                meta[key.strip()] = value.strip()
        elif line and not line.startswith("x,"):
            a, b = line.split(",")
            rows.append((float(a), float(b)))
    arr = np.array(rows)
    return meta, arr[:, 0], arr[:, 1]


def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)
