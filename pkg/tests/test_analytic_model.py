from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wgmtransit import analytic_model as am
from wgmtransit import constants as const

G_MAX = const.mhz_to_rad_us(100.0)


@pytest.fixture(scope="module")
def params():
    m = const.mhz_to_rad_us
    return am.FallModelParams(G_MAX, m(13.0), m(17.0), m(11.0))


def test_p_atom_special_values():
    assert am.p_atom(G_MAX, G_MAX) == 0.0
    assert am.p_atom(G_MAX / np.e, G_MAX) == pytest.approx(np.e / G_MAX)
    with pytest.raises(am.AnalyticDomainError):
        am.p_atom(2 * G_MAX, G_MAX)
    with pytest.raises(am.AnalyticDomainError):
        am.p_atom(0.0, G_MAX)


def test_zero_threshold_always_triggers(params):
    p0 = replace(params, threshold_counts=0)
    np.testing.assert_array_equal(am.p_trigger(p0, np.array([1.0, 100.0]), 0.3), [1.0, 1.0])


def test_single_count_threshold(params):
    """With a mean of one count per window and C_th = 1, P = 1 - 1/e."""
    g, theta = 300.0, 0.4
    t = float(am.transmission(params, g, theta))
    p1 = replace(params, threshold_counts=1, window_us=1.0 / (t * params.input_flux))
    assert am.p_trigger(p1, g, theta) == pytest.approx(1 - np.exp(-1))


@given(g=st.floats(1.0, 600.0), theta=st.floats(0, 2 * np.pi), c=st.integers(1, 8))
def test_trigger_probability_monotone_in_threshold(params, g, theta, c):
    a = am.p_trigger(replace(params, threshold_counts=c), g, theta)
    b = am.p_trigger(replace(params, threshold_counts=c + 1), g, theta)
    assert 0.0 <= b <= a <= 1.0


def test_normalisation(params):
    grid, dens = am.p_fall_joint(params)
    total = np.sum(dens * grid.weight_g[:, None]) * grid.weight_theta
    assert total == pytest.approx(1.0, abs=1e-12)
    assert am.normalization_check(params) < 1e-3


def test_marginal_cdf_properties(params):
    F = am.marginal_cdf(params)
    g = np.linspace(0, G_MAX, 50)
    assert F(0.0) == 0.0 and F(G_MAX) == pytest.approx(1.0)
    assert np.all(np.diff(F(g)) >= 0)


def test_sifting_raises_mean_coupling(params):
    """A stricter trigger threshold selects atoms that were closer to the surface."""
    low = am.mean_coupling(replace(params, threshold_counts=1))
    high = am.mean_coupling(replace(params, threshold_counts=6))
    assert 0 < low < high < G_MAX


def test_spectrum_bounded_and_bare_limit(params):
    offsets = const.mhz_to_rad_us(np.array([-60.0, 0.0, 60.0]))
    s = am.spectrum(params, offsets)
    assert np.all((s >= 0) & (s <= 1))
    far = am.spectrum(params, const.mhz_to_rad_us(np.array([2000.0])))
    assert far[0] == pytest.approx(1.0, abs=1e-3)


def test_constant_velocity_samples_follow_p_atom(params):
    rng = np.random.default_rng(1)
    g = am.sample_constant_velocity(params, rng, 400_000)
    lo = G_MAX * np.exp(-4)
    g = g[g > lo]
    edges = np.geomspace(lo, G_MAX, 15)
    hist, _ = np.histogram(g, edges)
    mid = np.sqrt(edges[1:] * edges[:-1])
    expected = np.array([np.sum(am.p_atom(np.linspace(a, b, 200)[1:-1], G_MAX)) * (b - a) / 198
                         for a, b in zip(edges[:-1], edges[1:])])
    expected *= hist.sum() / expected.sum()
    np.testing.assert_allclose(hist[:-1], expected[:-1], rtol=0.05)
    assert mid.size == hist.size


def test_invalid_parameters():
    with pytest.raises(ValueError):
        am.FallModelParams(-1.0, 1.0, 1.0, 1.0)
