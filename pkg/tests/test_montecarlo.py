import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats
from scipy.integrate import quad
from scipy.special import k0

from ccistat.cci import InterferenceCf, NumericPdf, pdf_equal_power
from ccistat.errors import InvalidArgumentError
from ccistat.geometry import TWO_CELL_EDGE, first_tier_scenario, link_budget, position_along
from ccistat.montecarlo import (
    CHUNK_SIZE,
    EmpiricalPdf,
    SampleBatch,
    analytic_bin_masses,
    chunk_generator,
    chunk_sizes,
    empirical_pdf,
    gaussian_bin_masses,
    kl_distance,
    kl_to_gaussian,
    sample,
    sample_components,
    symmetric_edges,
)

SEED = 20261018


def _edge_point(d, p):
    scenario = first_tier_scenario(p)
    pos = position_along(TWO_CELL_EDGE, d)
    return scenario, pos, link_budget(scenario, pos)


def test_idle_interferers_give_exact_zeros():
    batch = sample_components([1.0, 2.0, 3.0], 0.0, tag="I", n=50_000, seed=3)
    assert not np.any(batch.values)
    hist = empirical_pdf(batch, 11, range=(-1.0, 1.0))
    assert hist.probabilities[5] == 1.0
    assert hist.probabilities.sum() == 1.0


def test_interference_moments_full_loading():
    scenario, pos, budget = _edge_point(0.5, 1.0)
    n = 1_000_000
    batch = sample(scenario, pos, "I", n, seed=SEED)
    target = float(np.sum(budget.interferer_powers))
    assert abs(batch.mean()) <= 4 * math.sqrt(target / n)
    assert batch.variance() == pytest.approx(target, rel=0.01)
    assert batch.component_tag == "I" and batch.seed == SEED and batch.count == n


def test_interference_moments_partial_loading():
    # kurtosis grows like 9/p, so the tolerance is four standard errors of the variance
    scenario, pos, budget = _edge_point(0.5, 0.5)
    n = 1_000_000
    v = sample(scenario, pos, "I", n, seed=SEED).values
    target = 0.5 * float(np.sum(budget.interferer_powers))
    se = math.sqrt(np.var(v * v) / n)
    assert abs(np.mean(v * v) - target) <= 4 * se


def test_noise_only_is_gaussian():
    noise = 0.3
    batch = sample_components([], 1.0, noise_variance=noise, tag="Z", n=200_000, seed=SEED)
    ks = stats.kstest(batch.values, "norm", args=(0.0, math.sqrt(noise)))
    critical = 1.628 / math.sqrt(batch.count)  # 1% asymptotic critical value
    assert ks.statistic < critical


def test_received_signal_variance():
    scenario, pos, budget = _edge_point(0.5, 1.0)
    scenario = scenario.with_noise(0.1)
    batch = sample(scenario, pos, "Y", 10_000_000, seed=SEED)
    target = budget.desired_power + float(np.sum(budget.interferer_powers)) + 0.1
    assert batch.variance() == pytest.approx(target, rel=0.01)


def test_reproducible_and_worker_independent():
    args = ([1.0, 0.5], [0.3, 0.8], 0.01, 2.0, "Y")
    n = 2 * CHUNK_SIZE + 123
    a = sample_components(*args, n=n, seed=11).values
    b = sample_components(*args, n=n, seed=11, workers=3).values
    c = sample_components(*args, n=n, seed=12).values
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_chunking():
    assert chunk_sizes(CHUNK_SIZE) == [CHUNK_SIZE]
    assert chunk_sizes(CHUNK_SIZE + 5) == [CHUNK_SIZE, 5]
    assert chunk_sizes(7) == [7]
    x = chunk_generator(1, 0).random(4)
    assert np.array_equal(x, chunk_generator(1, 0).random(4))
    assert not np.array_equal(x, chunk_generator(1, 1).random(4))
    assert not np.array_equal(x, chunk_generator(1, 0, stream=2).random(4))


@pytest.mark.parametrize("kwargs", [
    {"tag": "X"}, {"n": 0}, {"seed": -1}, {"noise_variance": -1.0}, {"loading": 1.5}])
def test_sampling_rejects(kwargs):
    args = {"powers": [1.0], "loading": 1.0}
    args.update(kwargs)
    with pytest.raises(InvalidArgumentError):
        sample_components(**args)


def test_standard_normal_histogram():
    values = np.random.Generator(np.random.Philox(SEED)).standard_normal(1_000_000)
    edges = np.linspace(-6.0, 6.0, 102)
    hist = empirical_pdf(values, edges)
    z = hist.binomial_z(gaussian_bin_masses(edges, 1.0))
    assert np.max(np.abs(z)) <= 3.0


def test_histogram_folds_out_of_range():
    values = np.array([-5.0, -0.5, 0.0, 0.2, 0.99, 1.0, 7.0, -1.0])
    hist = empirical_pdf(values, 10, range=(-1.0, 1.0))
    assert hist.below == 1 and hist.above == 2
    assert hist.out_of_range == pytest.approx(3 / 8)
    assert hist.probabilities[0] == pytest.approx(2 / 8)
    assert hist.probabilities[-1] == pytest.approx(3 / 8)
    assert hist.probabilities.sum() == pytest.approx(1.0)
    assert np.allclose(hist.density * hist.widths, hist.probabilities)
    assert hist.outside_moment == pytest.approx((25.0 + 1.0 + 49.0) / 8)


def test_histogram_variance_keeps_folded_tails():
    # a heavy-tailed law with much of its variance beyond 8 standard deviations
    batch = sample_components([1.0, 0.05], 0.1, n=1_000_000, seed=SEED)
    sd = math.sqrt(batch.variance())
    hist = empirical_pdf(batch, symmetric_edges(sd))
    assert hist.out_of_range > 0
    assert hist.variance() == pytest.approx(np.mean(batch.values ** 2), rel=1e-3)
    folded = EmpiricalPdf(hist.edges, hist.probabilities, hist.count, hist.below, hist.above)
    assert folded.variance() < 0.99 * hist.variance()


def test_histogram_matches_numpy_inside_range():
    values = np.random.default_rng(5).normal(size=10_000)
    inside = values[np.abs(values) < 3]
    hist = empirical_pdf(inside, 31, range=(-3.0, 3.0))
    counts, _ = np.histogram(inside, np.linspace(-3, 3, 32))
    assert np.array_equal(np.round(hist.probabilities * inside.size), counts)


def test_histogram_rejects():
    with pytest.raises(InvalidArgumentError):
        empirical_pdf(np.array([]))
    with pytest.raises(InvalidArgumentError):
        empirical_pdf(np.ones(10), 5)
    with pytest.raises(InvalidArgumentError):
        empirical_pdf(np.ones(10), 20, range=(1.0, 0.0))


def test_histogram_variance_has_sheppard_correction():
    values = np.random.default_rng(9).normal(size=1_000_000)
    hist = empirical_pdf(values, 25, range=(-6.25, 6.25))
    raw = float(np.sum(hist.probabilities * hist.centers ** 2))
    assert raw - hist.variance() == pytest.approx(0.25 / 12)
    assert hist.variance() == pytest.approx(np.var(values), rel=2e-3)


def test_empirical_csv_uses_density_schema():
    batch = sample_components([1.0, 1.0], 1.0, n=20_000, seed=2)
    edges = symmetric_edges(math.sqrt(2.0), 41, 8.0)
    hist = empirical_pdf(batch, edges)
    text = hist.to_csv()
    assert "# atom_mass=0.0" in text and "# component=I" in text
    back = NumericPdf.from_csv(io.StringIO(text))
    assert np.allclose(back.x, hist.centers)
    assert np.allclose(back.density, hist.density)


def test_symmetric_edges():
    edges = symmetric_edges(2.0, 401, 8.0)
    assert edges.size == 402
    assert edges[0] == -16.0 and edges[-1] == 16.0
    assert 0.0 == pytest.approx(0.5 * (edges[200] + edges[201]), abs=1e-12)
    with pytest.raises(InvalidArgumentError):
        symmetric_edges(0.0)


def test_gaussian_bin_masses_fold_tails():
    edges = np.linspace(-2, 2, 11)
    m = gaussian_bin_masses(edges, 1.0)
    assert m.sum() == pytest.approx(1.0, abs=1e-15)
    assert m[0] == pytest.approx(stats.norm.cdf(-1.6), rel=1e-12)


def test_gaussian_bin_masses_keep_tail_precision():
    edges = symmetric_edges(1.0, 401, 12.0)
    m = gaussian_bin_masses(edges, 1.0)
    assert np.all(m > 0)
    assert np.allclose(m, m[::-1], rtol=1e-12, atol=0)
    assert m[-2] == pytest.approx(stats.norm.sf(edges[-3]) - stats.norm.sf(edges[-2]), rel=1e-10)


def test_kl_basics():
    g = gaussian_bin_masses(symmetric_edges(1.0, 41), 1.0)
    assert kl_distance(g, g) == 0.0
    f = np.zeros_like(g)
    f[20] = 1.0
    assert kl_distance(f, g) == pytest.approx(-math.log(g[20]))
    assert kl_distance(g, f) == math.inf
    with pytest.raises(InvalidArgumentError):
        kl_distance(g, g[:-1])
    with pytest.raises(InvalidArgumentError):
        kl_distance(-g, g)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(1e-6, 1.0), min_size=2, max_size=30), st.integers(0, 2 ** 32 - 1))
def test_kl_gibbs_inequality(weights, seed):
    f = np.asarray(weights) / np.sum(weights)
    g = np.random.default_rng(seed).permutation(f)
    kl = kl_distance(f, g)
    assert kl >= 0.0
    if np.array_equal(f, g):
        assert kl == 0.0
    elif np.max(np.abs(f - g)) > 1e-3:
        assert kl > 0.0


def test_kl_laplace_oracle():
    # Laplace(1) against Normal(0, 2): h(N) - h(L) = 1/2 ln(4 pi e) - (1 + ln 2)
    oracle = 0.5 * math.log(4 * math.pi * math.e) - 1 - math.log(2)
    assert oracle == pytest.approx(0.0724, abs=5e-5)
    edges = symmetric_edges(math.sqrt(2.0), 4001, 12.0)
    kl = kl_distance(analytic_bin_masses(InterferenceCf([1.0, 1.0], 1.0), edges),
                     gaussian_bin_masses(edges, 2.0))
    assert kl == pytest.approx(0.0724, abs=0.005)
    assert kl == pytest.approx(oracle, abs=1e-4)


def test_kl_to_gaussian_accepts_laws_and_histograms():
    law = pdf_equal_power(2, 1.0)
    edges = symmetric_edges(math.sqrt(2.0))
    a = kl_to_gaussian(law, 2.0, edges)
    b = kl_to_gaussian(analytic_bin_masses(InterferenceCf([1.0, 1.0], 1.0), edges), 2.0, edges)
    assert a == pytest.approx(b, abs=1e-4)
    batch = sample_components([1.0, 1.0], 1.0, n=1_000_000, seed=SEED)
    c = kl_to_gaussian(empirical_pdf(batch, edges), 2.0, edges)
    assert c == pytest.approx(a, abs=5e-3)
    with pytest.raises(InvalidArgumentError):
        kl_to_gaussian(empirical_pdf(batch, edges), 2.0, symmetric_edges(1.0))


def _kl(powers, p):
    cf = InterferenceCf(powers, p)
    edges = symmetric_edges(math.sqrt(cf.variance))
    return kl_distance(analytic_bin_masses(cf, edges), gaussian_bin_masses(edges, cf.variance))


def test_kl_decreases_with_interferer_count():
    values = [_kl([1.0] * m, 1.0) for m in (1, 2, 4, 6)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_kl_increases_as_loading_drops():
    powers = link_budget(first_tier_scenario(1.0), position_along(TWO_CELL_EDGE, 0.5)).interferer_powers
    values = [_kl(powers, p) for p in (1.0, 0.7, 0.4, 0.1)]
    assert all(a < b for a, b in zip(values, values[1:]))


def test_kl_increases_toward_cell_edge():
    scenario = first_tier_scenario(1.0)
    values = [_kl(link_budget(scenario, position_along(TWO_CELL_EDGE, d)).interferer_powers, 0.5)
              for d in (0.1, 0.4, 0.7, 1.0)]
    assert all(a < b for a, b in zip(values, values[1:]))


def test_sample_batch_stats():
    b = SampleBatch(np.array([1.0, -1.0, 3.0, -3.0]), 0, "I")
    assert b.mean() == 0.0 and b.variance() == 5.0 and b.count == 4


def test_empirical_pdf_metadata():
    hist = EmpiricalPdf(np.linspace(-1, 1, 12), np.full(11, 1 / 11), 11)
    assert hist.out_of_range == 0.0
    assert np.allclose(hist.expected_counts(np.full(11, 1 / 11)), 1.0)


def test_single_interferer_bin_masses_against_exact_integrals():
    # oracle: P(0 < X < b) = int_0^b K0(t) dt / pi, by adaptive quadrature of scipy's K0
    edges = symmetric_edges(1.0)
    positive = edges[edges > 0]
    pieces = [quad(k0, a, b, limit=200)[0] for a, b in zip(np.concatenate([[0.0], positive[:-1]]), positive)]
    half = np.cumsum(pieces) / math.pi
    cdf = np.concatenate([0.5 - half[::-1], 0.5 + half])
    exact = np.diff(cdf)
    exact[0] += cdf[0]
    exact[-1] += 1 - cdf[-1]
    masses = analytic_bin_masses(InterferenceCf([1.0], 1.0), edges)
    assert np.max(np.abs(masses - exact)) < 1e-8
    g = gaussian_bin_masses(edges, 1.0)
    assert kl_distance(masses, g) == pytest.approx(kl_distance(exact, g), abs=1e-8)
