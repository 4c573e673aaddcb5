import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccistat.errors import DegenerateGeometryError, InvalidArgumentError
from ccistat.geometry import (
    THREE_CELL_CORNER,
    TWO_CELL_EDGE,
    LinkBudget,
    Scenario,
    edge_snr_noise,
    first_tier_scenario,
    hex_layout,
    link_budget,
    position_along,
    trajectory,
)

SQRT3 = math.sqrt(3.0)


def _pairwise(points):
    d = points[:, None, :] - points[None, :, :]
    return np.sort(np.hypot(d[..., 0], d[..., 1]).ravel())


@pytest.mark.parametrize("rings, count", [(1, 7), (2, 19), (3, 37)])
def test_hex_layout_counts(rings, count):
    pos = hex_layout(rings, 1.0)
    assert pos.shape == (count, 2)
    assert np.array_equal(pos[0], [0.0, 0.0])
    assert len(_pairwise(pos)) == count * count


def test_first_ring_distance_and_angles():
    pos = hex_layout(1, 1.0)[1:]
    assert np.allclose(np.hypot(pos[:, 0], pos[:, 1]), SQRT3)
    angles = np.sort(np.degrees(np.arctan2(pos[:, 1], pos[:, 0])) % 360)
    assert np.allclose(angles, [0, 60, 120, 180, 240, 300])
    assert np.allclose(np.hypot(*hex_layout(1, 2.0)[1].T), 2 * SQRT3)


def test_layout_sites_are_distinct_and_on_lattice():
    pos = hex_layout(3, 1.0)
    d = _pairwise(pos)
    nonzero = d[d > 1e-9]
    assert nonzero.min() == pytest.approx(SQRT3)
    assert np.count_nonzero(d < 1e-9) == pos.shape[0]


@pytest.mark.parametrize("rings, R", [(0, 1.0), (1.5, 1.0), (1, 0.0), (1, -2.0)])
def test_hex_layout_rejects(rings, R):
    with pytest.raises(InvalidArgumentError):
        hex_layout(rings, R)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 3))
def test_layout_rotation_invariance(rings):
    pos = hex_layout(rings, 1.0)
    c, s = math.cos(math.pi / 3), math.sin(math.pi / 3)
    rotated = pos @ np.array([[c, s], [-s, c]])
    assert np.allclose(_pairwise(rotated), _pairwise(pos))
    # the rotated set is the same set of sites
    dist = np.hypot(*(rotated[:, None, :] - pos[None, :, :]).transpose(2, 0, 1))
    assert np.all(dist.min(axis=1) < 1e-9)


def _unit_scenario(positions, alpha=4.0):
    return Scenario(1.0, positions, 1.0, alpha, 1.0, 0.0)


def test_link_budget_power_law():
    sc = _unit_scenario(np.array([[0.0, 0.0], [3.0, 0.0]]))
    budget = link_budget(sc, [1.0, 0.0])
    assert budget.received_powers[0] == pytest.approx(1.0)
    assert budget.received_powers[1] == pytest.approx(2.0 ** -4)
    assert np.allclose(budget.path_gains, budget.distances ** -4.0)


def test_link_budget_half_radius_example():
    sc = first_tier_scenario(1.0)
    budget = link_budget(sc, position_along(TWO_CELL_EDGE, 0.5))
    assert budget.desired_power == pytest.approx(16.0)
    brute = np.hypot(*(sc.bs_positions - np.array([0.5, 0.0])).T)
    assert np.allclose(budget.distances, brute)
    assert budget.distances[1:].min() == pytest.approx(SQRT3 - 0.5)
    assert budget.interferer_powers.max() == pytest.approx((SQRT3 - 0.5) ** -4)
    assert budget.interferer_powers.max() == pytest.approx(0.4339, abs=1e-4)


def test_link_budget_at_base_station():
    sc = first_tier_scenario(1.0)
    with pytest.raises(DegenerateGeometryError):
        link_budget(sc, sc.bs_positions[3])


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 1.0), st.sampled_from([TWO_CELL_EDGE, THREE_CELL_CORNER]))
def test_powers_sorted_by_distance(fraction, kind):
    sc = first_tier_scenario(1.0, rings=2)
    ms = trajectory(kind, fraction)
    if np.min(np.hypot(*(sc.bs_positions - ms).T)) == 0:
        return
    budget = link_budget(sc, ms)
    order = np.argsort(budget.distances, kind="stable")
    assert np.all(np.diff(budget.received_powers[order]) <= 0)


@pytest.mark.parametrize("p0, R, snr_db, expected", [
    (1.0, 1.0, 30.0, 1e-3), (1.0, 1.0, 0.0, 1.0), (2.0, 2.0, 30.0, 1.25e-4)])
def test_edge_snr_noise(p0, R, snr_db, expected):
    sc = Scenario(R, hex_layout(1, R), p0, 4.0, 1.0, 0.0)
    assert edge_snr_noise(sc, snr_db) == pytest.approx(expected, rel=1e-12)


def test_trajectory_endpoints():
    assert np.allclose(trajectory(TWO_CELL_EDGE, 0.0), 0.0)
    assert np.allclose(trajectory(THREE_CELL_CORNER, 0.0), 0.0)
    edge = trajectory(TWO_CELL_EDGE, 1.0)
    pos = hex_layout(1, 1.0)
    assert np.hypot(*edge) == pytest.approx(SQRT3 / 2)
    assert np.hypot(*(edge - pos[1])) == pytest.approx(SQRT3 / 2)


def test_three_cell_corner_pairing():
    sc = first_tier_scenario(1.0)
    corner = trajectory(THREE_CELL_CORNER, 1.0)
    budget = link_budget(sc, corner)
    assert budget.distances[0] == pytest.approx(1.0)
    d = np.sort(budget.distances[1:])
    assert np.allclose(d, [1, 1, 2, 2, math.sqrt(7), math.sqrt(7)])
    e = np.sort(budget.interferer_powers)[::-1]
    assert np.allclose(e[0::2], e[1::2], rtol=1e-13)


def test_trajectory_rejects():
    with pytest.raises(InvalidArgumentError):
        trajectory(TWO_CELL_EDGE, 1.5)
    with pytest.raises(InvalidArgumentError):
        trajectory("diagonal", 0.5)


def test_scenario_validation():
    pos = hex_layout(1, 1.0)
    with pytest.raises(InvalidArgumentError):
        Scenario(1.0, pos, 1.0, 4.0, 1.5, 0.0)
    with pytest.raises(InvalidArgumentError):
        Scenario(1.0, pos, -1.0, 4.0, 1.0, 0.0)
    with pytest.raises(InvalidArgumentError):
        Scenario(0.0, pos, 1.0, 4.0, 1.0, 0.0)
    with pytest.raises(InvalidArgumentError):
        Scenario(1.0, np.vstack([pos, pos[:1]]), 1.0, 4.0, 1.0, 0.0)
    sc = Scenario(1.0, pos, 1.0, 4.0, 0.5, 0.0)
    assert sc.num_interferers == 6
    assert np.allclose(sc.with_loading(0.2).loading_rates, 0.2)
    assert sc.with_noise(1e-3).noise_variance == 1e-3


def test_link_budget_from_powers():
    b = LinkBudget.from_powers(2.0, [0.5, 0.25])
    assert b.desired_power == 2.0
    assert b.num_interferers == 2
    assert LinkBudget.from_powers(1.0).num_interferers == 0
