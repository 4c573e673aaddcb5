import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.special import k0

from ccistat.cci import (
    GridSpec,
    equal_power_density,
    laplace_power_density,
    partial_fractions,
    pdf_equal_power,
    pdf_single_cci,
    pdf_three_pair,
    three_pair_coefficients,
    three_pair_density,
)
from ccistat.errors import InvalidArgumentError


@pytest.mark.parametrize("m, power, x, expected", [
    (2, 1.0, 0.0, 0.5),
    (6, 1.0, 0.0, 3 / 16),
    (4, 4.0, 2.0, math.exp(-1) * 0.25),
    (1, 1.0, 1.0, k0(1.0) / math.pi),
])
def test_equal_power_examples(m, power, x, expected):
    assert equal_power_density(x, m, power) == pytest.approx(expected, rel=1e-12)


def test_example_rounded_values():
    assert equal_power_density(2.0, 4, 4.0) == pytest.approx(0.091970, abs=5e-7)
    # K0(1)/pi = 0.4210244382/pi = 0.1340162; the oracle is scipy's K0
    assert equal_power_density(1.0, 1, 1.0) == pytest.approx(0.1340162, abs=5e-7)


def test_explicit_polynomials():
    # the four- and six-interferer forms written out by hand
    x = np.linspace(-15, 15, 301)
    a = np.abs(x)
    four = np.exp(-a) * (a / 4 + 0.25)
    six = np.exp(-a) * (a * a / 16 + 3 * a / 16 + 3 / 16)
    assert np.allclose(equal_power_density(x, 4, 1.0), four, atol=1e-15)
    assert np.allclose(equal_power_density(x, 6, 1.0), six, atol=1e-15)


@pytest.mark.parametrize("m", [2, 4, 6])
@pytest.mark.parametrize("power", [0.3, 1.0, 7.0])
def test_closed_forms_normalized_with_right_variance(m, power):
    law = pdf_equal_power(m, power)
    # the Laplace cusp at zero costs the trapezoid rule O(dx^2), about 2e-5 here
    assert law.mass() == pytest.approx(1.0, abs=1e-4)
    assert law.variance() == pytest.approx(m * power, rel=1e-4)
    assert np.array_equal(law.density, law.density[::-1])


def test_single_cci_law():
    law = pdf_single_cci(1.0, 0.5)
    assert law.atom_mass == 0.5
    assert law.singular
    assert law.mass() == pytest.approx(1.0, abs=1e-3)
    full = pdf_single_cci(1.0, 1.0, law.grid)
    off = law.x != 0
    assert np.allclose(law.density[off], 0.5 * full.density[off], rtol=1e-15)
    assert full.continuous_mass() == pytest.approx(1.0, abs=1e-3)
    assert pdf_single_cci(1.0, 0.0, law.grid).atom_mass == 1.0


def test_single_cci_center_is_cell_average():
    dx = 0.01
    law = pdf_single_cci(1.0, 1.0, GridSpec(dx, 20.0))
    # average of K0(x)/pi over [-dx/2, dx/2]: x(1 - ln(x/2) - gamma)/pi per unit length to leading order
    h = dx / 2
    approx = (1 - math.log(h / 2) - np.euler_gamma) / math.pi
    assert law.density[law.center] == pytest.approx(approx, rel=1e-4)


def test_unsupported_counts():
    for m in (3, 5, 7, 0):
        with pytest.raises(InvalidArgumentError):
            equal_power_density(1.0, m, 1.0)
        with pytest.raises(InvalidArgumentError):
            pdf_equal_power(m, 1.0)
    with pytest.raises(InvalidArgumentError):
        pdf_equal_power(2, 0.0)
    with pytest.raises(InvalidArgumentError):
        laplace_power_density(1.0, 1.0, 1.5)


def test_three_pair_coefficients_example():
    a = three_pair_coefficients(4, 2, 1)
    assert a == pytest.approx((8 / 3, -2.0, 1 / 3), rel=1e-15)
    assert sum(a) == pytest.approx(1.0, abs=1e-15)


powers3 = st.tuples(*[st.floats(1e-3, 1e3)] * 3)


@settings(max_examples=200, deadline=None)
@given(powers3)
def test_three_pair_coefficients_sum_to_one(e):
    e1, e2, e3 = e
    assume(min(abs(e1 - e2), abs(e1 - e3), abs(e2 - e3)) > 1e-3 * max(e))
    a = three_pair_coefficients(e1, e2, e3)
    assert abs(sum(a) - 1.0) <= 64 * np.finfo(float).eps * sum(abs(v) for v in a)


def test_three_pair_density_formula():
    e = (4.0, 2.0, 1.0)
    x = np.linspace(-20, 20, 401)
    a = three_pair_coefficients(*e)
    expected = sum(am / (2 * math.sqrt(em)) * np.exp(-np.abs(x) / math.sqrt(em)) for am, em in zip(a, e))
    assert np.allclose(three_pair_density(x, e), expected, atol=1e-15)


def test_three_pair_reduces_to_laplace():
    x = np.linspace(0.5, 15, 100)
    f = three_pair_density(x, (1.0, 1e-12, 2e-12))
    assert np.allclose(f, 0.5 * np.exp(-x), atol=1e-9)


def test_three_pair_limit_consistency():
    eps = 1e-4
    e = (1.0, 1.0 + eps, 1.0 + 2 * eps)
    law = pdf_three_pair(*e, grid=GridSpec(0.01, 40.0))
    assert law.diagnostics == {}
    # the six-interferer form at the mean pair power; the O(eps^2) gap is ~1e-9
    target = equal_power_density(law.x, 6, float(np.mean(e)))
    assert np.max(np.abs(law.density - target)) < 1e-6


def test_three_pair_merges_near_equal():
    law = pdf_three_pair(1.0, 1.0 + 1e-9, 1.0 - 1e-9, grid=GridSpec(0.01, 40.0))
    assert law.diagnostics["merged_groups"] == 1
    assert np.allclose(law.density, equal_power_density(law.x, 6, 1.0), atol=1e-12)
    two = pdf_three_pair(2.0, 1.0, 1.0, grid=GridSpec(0.01, 60.0))
    assert two.diagnostics["merged_groups"] == 2
    assert two.mass() == pytest.approx(1.0, abs=1e-6)
    assert two.variance() == pytest.approx(8.0, rel=1e-4)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.01, 100.0), min_size=1, max_size=6), st.floats(0.0, 10.0))
def test_partial_fractions_reproduce_product(powers, z):
    ordered = sorted(powers)
    assume(all(b - a > 0.05 * b for a, b in zip(ordered, ordered[1:])))
    direct = np.prod([1.0 / (1.0 + e * z) for e in powers])
    terms = partial_fractions(powers)
    assert len(terms) == len(powers)
    expanded = sum(a / (1.0 + e * z) ** k for e, k, a in terms)
    scale = sum(abs(a) / (1.0 + e * z) ** k for e, k, a in terms)
    assert expanded == pytest.approx(direct, abs=1e-12 * scale + 1e-300)


@pytest.mark.parametrize("powers", [(1.0, 1.0, 2.0, 2.0, 2.0), (3.0, 0.5, 0.5, 1.0), (1.0,) * 4])
@pytest.mark.parametrize("z", [0.0, 0.3, 5.0])
def test_partial_fractions_repeated_factors(powers, z):
    direct = np.prod([1.0 / (1.0 + e * z) for e in powers])
    expanded = sum(a / (1.0 + e * z) ** k for e, k, a in partial_fractions(powers))
    assert expanded == pytest.approx(direct, rel=1e-12)
