"""Hexagonal cell layout, mobile-station positions and link budgets.

Base station 0 serves the mobile; every other base station interferes.
Inter-site distance is ``sqrt(3) * R`` where ``R`` is the center-to-vertex
radius of a hexagonal cell, so the first ring sits at angles 0, 60, ..., 300
degrees and the serving cell's vertices at 30, 90, ..., 330 degrees.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGeometryError, InvalidArgumentError

SQRT3 = np.sqrt(3.0)

TWO_CELL_EDGE = "two-cell-edge"
THREE_CELL_CORNER = "three-cell-corner"
TRAJECTORIES = (TWO_CELL_EDGE, THREE_CELL_CORNER)


def _frozen(values, name, length=None):
    arr = np.array(values, dtype=np.float64)
    if length is not None:
        if arr.ndim == 0:
            arr = np.full(length, float(arr))
        if arr.shape != (length,):
            raise InvalidArgumentError(f"{name} must have length {length}, got shape {arr.shape}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Scenario:
    """Full downlink parameterization for one serving cell and its interferers.

    Scalars given for ``tx_powers``, ``pathloss_exponents`` or ``loading_rates``
    are broadcast to every base station (every interferer for loading).
    """

    cell_radius: float
    bs_positions: np.ndarray
    tx_powers: np.ndarray
    pathloss_exponents: np.ndarray
    loading_rates: np.ndarray
    noise_variance: float = 0.0

    def __post_init__(self):
        positions = np.array(self.bs_positions, dtype=np.float64)
        if positions.ndim != 2 or positions.shape[1] != 2 or positions.shape[0] < 1:
            raise InvalidArgumentError("bs_positions must be an (M+1, 2) array")
        positions.flags.writeable = False
        n = positions.shape[0]
        object.__setattr__(self, "bs_positions", positions)
        object.__setattr__(self, "tx_powers", _frozen(self.tx_powers, "tx_powers", n))
        object.__setattr__(self, "pathloss_exponents",
                           _frozen(self.pathloss_exponents, "pathloss_exponents", n))
        object.__setattr__(self, "loading_rates",
                           _frozen(self.loading_rates, "loading_rates", n - 1))
        object.__setattr__(self, "cell_radius", float(self.cell_radius))
        object.__setattr__(self, "noise_variance", float(self.noise_variance))

        if not self.cell_radius > 0:
            raise InvalidArgumentError("cell radius must be positive")
        if np.any(~(self.tx_powers > 0)):
            raise InvalidArgumentError("transmit powers must be positive")
        if np.any(~(self.pathloss_exponents > 0)):
            raise InvalidArgumentError("path-loss exponents must be positive")
        if np.any(~((self.loading_rates >= 0) & (self.loading_rates <= 1))):
            raise InvalidArgumentError("loading rates must lie in [0, 1]")
        if not self.noise_variance >= 0:
            raise InvalidArgumentError("noise variance must be non-negative")
        diffs = positions[:, None, :] - positions[None, :, :]
        dist = np.hypot(diffs[..., 0], diffs[..., 1])
        if np.any(dist[np.triu_indices(n, 1)] == 0):
            raise InvalidArgumentError("base station positions must be distinct")

    @property
    def num_interferers(self):
        return self.bs_positions.shape[0] - 1

    def with_noise(self, noise_variance):
        return Scenario(self.cell_radius, self.bs_positions, self.tx_powers,
                        self.pathloss_exponents, self.loading_rates, noise_variance)

    def with_loading(self, loading_rates):
        return Scenario(self.cell_radius, self.bs_positions, self.tx_powers,
                        self.pathloss_exponents, loading_rates, self.noise_variance)


@dataclass(frozen=True)
class LinkBudget:
    """Distances, path gains and mean received powers seen from one MS position.

    Index 0 of every array is the serving base station.
    """

    received_powers: np.ndarray
    distances: np.ndarray = None
    path_gains: np.ndarray = None
    ms_position: np.ndarray = field(default=None)

    def __post_init__(self):
        powers = _frozen(self.received_powers, "received_powers")
        if powers.ndim != 1 or powers.size < 1:
            raise InvalidArgumentError("received_powers must be a non-empty vector")
        if np.any(~(powers >= 0)):
            raise InvalidArgumentError("received powers must be non-negative")
        object.__setattr__(self, "received_powers", powers)
        for name in ("distances", "path_gains", "ms_position"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, _frozen(value, name))

    @classmethod
    def from_powers(cls, desired_power, interferer_powers=()):
        """Budget with the given mean powers and no geometry attached."""
        powers = np.concatenate([[float(desired_power)],
                                 np.asarray(interferer_powers, dtype=np.float64).reshape(-1)])
        return cls(powers)

    @property
    def desired_power(self):
        return float(self.received_powers[0])

    @property
    def interferer_powers(self):
        return self.received_powers[1:]

    @property
    def num_interferers(self):
        return self.received_powers.size - 1


def hex_layout(rings, R):
    """Base-station positions of a hexagonal layout with ``rings`` rings.

    Returns a ``(1 + 3 * rings * (rings + 1), 2)`` array; row 0 is the origin
    and ring ``k`` is listed counter-clockwise starting from angle 0.
    """
    if int(rings) != rings or rings < 1:
        raise InvalidArgumentError("rings must be a positive integer")
    if not R > 0:
        raise InvalidArgumentError("cell radius must be positive")
    rings = int(rings)
    isd = SQRT3 * R
    angles = np.deg2rad(60.0 * np.arange(7))
    corners = isd * np.column_stack([np.cos(angles), np.sin(angles)])
    points = [np.zeros(2)]
    for k in range(1, rings + 1):
        for j in range(6):
            step = (corners[j + 1] - corners[j])
            for i in range(k):
                points.append(k * corners[j] + i * step)
    return np.array(points)


def link_budget(scenario, ms_position):
    """Distances, path gains ``d**-alpha`` and received powers ``P * gain``."""
    ms = np.asarray(ms_position, dtype=np.float64).reshape(2)
    diffs = scenario.bs_positions - ms
    distances = np.hypot(diffs[:, 0], diffs[:, 1])
    if np.any(distances == 0):
        raise DegenerateGeometryError(f"mobile station at {ms.tolist()} coincides with a base station")
    gains = distances ** (-scenario.pathloss_exponents)
    return LinkBudget(scenario.tx_powers * gains, distances, gains, ms)


def edge_snr_noise(scenario, edge_snr_db):
    """Noise variance giving ``edge_snr_db`` for the serving link at distance R."""
    if not np.isfinite(edge_snr_db):
        raise InvalidArgumentError("edge SNR must be finite")
    edge_power = scenario.tx_powers[0] * scenario.cell_radius ** (-scenario.pathloss_exponents[0])
    return float(edge_power / 10.0 ** (edge_snr_db / 10.0))


def _direction(kind):
    if kind == TWO_CELL_EDGE:
        return np.array([1.0, 0.0])
    if kind == THREE_CELL_CORNER:
        return np.array([np.cos(np.pi / 6), np.sin(np.pi / 6)])
    raise InvalidArgumentError(f"unknown trajectory {kind!r}; expected one of {TRAJECTORIES}")


def trajectory(kind, fraction, R=1.0):
    """Point a ``fraction`` of the way from the cell center to the trajectory end.

    ``two-cell-edge`` ends at the midpoint between BS 0 and its first-ring
    neighbour at angle 0 (distance ``sqrt(3) R / 2``); ``three-cell-corner``
    ends at the hexagon vertex at 30 degrees (distance ``R``).
    """
    if not 0.0 <= fraction <= 1.0:
        raise InvalidArgumentError("fraction must lie in [0, 1]")
    direction = _direction(kind)
    end = SQRT3 * R / 2 if kind == TWO_CELL_EDGE else R
    return fraction * end * direction


def position_along(kind, d_over_R, R=1.0):
    """Point at distance ``d_over_R * R`` from BS 0 in the trajectory's direction.

    Sweeps are parameterized by distance rather than trajectory fraction, so
    on the two-cell-edge line ``d_over_R`` may exceed ``sqrt(3)/2`` and cross
    into the neighbouring cell.
    """
    if not d_over_R >= 0:
        raise InvalidArgumentError("distance must be non-negative")
    return d_over_R * R * _direction(kind)


def first_tier_scenario(loading, rings=1, R=1.0, tx_power=1.0, alpha=4.0, edge_snr_db=30.0):
    """Equal-power, equal-exponent, equal-loading layout used by the figure presets."""
    positions = hex_layout(rings, R)
    base = Scenario(R, positions, tx_power, alpha, loading, 0.0)
    return base.with_noise(edge_snr_noise(base, edge_snr_db))
