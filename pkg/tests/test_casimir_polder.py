import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wgmtransit import casimir_polder as cp
from wgmtransit import constants as const
from wgmtransit import surface_response as sr

A0 = sr.ALPHA0_TARGET_M3
LAM = 0.852347


def const_fn(value):
    return lambda xi: np.full_like(np.asarray(xi, float), value)


def to_rad_us(u_joule):
    return u_joule / const.HBAR * const.US


def test_retarded_perfect_conductor_limit():
    """Constant alpha near a perfect mirror: U = -3 hbar c alpha / (8 pi d^4)."""
    d = 5.0
    u = cp.lifshitz_potential(const_fn(A0), const_fn(1e9), d, temperature_k=1.0)
    c4 = 3 * const.HBAR * const.C_LIGHT * A0 / (8 * np.pi)
    assert u == pytest.approx(to_rad_us(-c4 / (d * 1e-6) ** 4), rel=1e-3)


@given(eps0=st.floats(1.5, 10.0))
def test_thermal_limit_is_zero_frequency_term(eps0):
    d = 20.0
    u = cp.lifshitz_potential(const_fn(A0), const_fn(eps0), d, temperature_k=300.0)
    expect = -const.K_B * 300.0 * A0 * (eps0 - 1) / (eps0 + 1) / (4 * (d * 1e-6) ** 3)
    assert u == pytest.approx(to_rad_us(expect), rel=1e-6)


def test_short_distance_approaches_nonretarded_c3():
    atom = sr.build_atom_response()
    osc = sr.load_oscillators()
    alpha = lambda xi: sr.polarizability_imag_axis(atom.ground, xi)
    eps = lambda xi: sr.epsilon_imag_axis(osc, xi)
    c3 = cp.nonretarded_c3(alpha, eps)
    d = 1e-3
    u = cp.lifshitz_potential(alpha, eps, d, xi_max=cp._xi_max(atom, osc))
    assert -u * d**3 * 1e6 / const.TWO_PI == pytest.approx(c3, rel=0.01)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        cp.lifshitz_potential(const_fn(A0), const_fn(2.0), -1.0)
    with pytest.raises(ValueError):
        cp.lifshitz_potential(const_fn(A0), const_fn(2.0), 1.0, temperature_k=0.0)
    with pytest.raises(ValueError):
        cp.SurfaceGeometry.cylinder(0.0)


def test_unconverged_sum_raises():
    """A tiny cap on a frequency-independent metal cannot converge."""
    with pytest.raises(cp.ConvergenceError):
        cp.lifshitz_potential(const_fn(A0), const_fn(1e9), 0.01, temperature_k=300.0,
                              xi_max=1e30, rtol=1e-30)


@given(x=st.floats(0.05, 30.0))
def test_perfect_mirror_decay_rates(x):
    """Closed-form image-dipole rates, x = 2 k d."""
    d = x * LAM / (4 * np.pi)
    par, perp = cp.modified_decay_rates(np.inf, d, LAM)
    s, c = np.sin(x), np.cos(x)
    perp_ref = 1 + 3 * (s / x**3 - c / x**2)
    par_ref = 1 - 1.5 * (s / x + c / x**2 - s / x**3)
    assert perp == pytest.approx(perp_ref, abs=1e-7)
    assert par == pytest.approx(par_ref, abs=1e-7)


def test_mirror_contact_limits():
    assert cp.modified_decay_rates(np.inf, 0.0, LAM) == (0.0, 2.0)


def test_far_field_rates_return_to_free_space():
    eps = complex(2.1, 0.001)
    par, perp = cp.modified_decay_rates(eps, 20.0, LAM)
    assert par == pytest.approx(1.0, abs=0.02)
    assert perp == pytest.approx(1.0, abs=0.02)


def test_isotropic_average():
    assert cp.isotropic_rate(1.0, 1.0) == pytest.approx(1.0)
    assert cp.isotropic_rate(0.5, 2.0) == pytest.approx((2 * 0.5 + 2.0) / 3)


@given(p=st.floats(0.0, 6.0))
def test_log_table_reproduces_power_laws(p):
    d = cp.log_grid(1e-3, 20.0, 200)
    table = cp.LogGridTable.build(d, 3.0 * d**-p, power=p)
    x = np.array([2.3e-3, 0.17, 4.4])
    np.testing.assert_allclose(table(x), 3.0 * x**-p, rtol=1e-9)
    np.testing.assert_allclose(table.derivative(x), -3.0 * p * x ** (-p - 1), rtol=1e-6,
                               atol=1e-9)


def test_window_is_smooth_step():
    d = np.linspace(0.0, 2.0, 201)
    w = cp.smooth_window(d, 0.5, 1.0)
    assert w[0] == 1.0 and w[-1] == 0.0
    assert np.all(np.diff(w) <= 0)
    x = np.linspace(0.51, 0.99, 25)
    h = 1e-6
    num = (cp.smooth_window(x + h, 0.5, 1.0) - cp.smooth_window(x - h, 0.5, 1.0)) / (2 * h)
    np.testing.assert_allclose(cp.smooth_window_derivative(x, 0.5, 1.0), num, rtol=1e-6)


def test_surface_model_shapes(plane_surface, cylinder_surface):
    for s in (plane_surface, cylinder_surface):
        assert np.all(s.ground.u_rad_us < 0)
        assert np.all(np.diff(s.ground.u_rad_us) > 0)
        assert np.all(s.perpendicular.ratio > 0)
    # curvature weakens the attraction at a given distance
    d = np.array([0.05, 0.3, 1.0])
    assert np.all(np.abs(cylinder_surface.ground(d)) < np.abs(plane_surface.ground(d)))


def test_excited_state_shift_is_larger(plane_surface):
    d = np.array([0.02, 0.05, 0.1])
    assert np.all(np.abs(plane_surface.excited(d)) > np.abs(plane_surface.ground(d)))


def test_effective_rates(plane_surface):
    d = 0.1
    g0, delta, f0 = plane_surface.effective_atom_rates(d, 0.0)
    _, _, f1 = plane_surface.effective_atom_rates(d, 1.0)
    assert f0 == pytest.approx(-plane_surface.ground.derivative(d))
    assert f1 == pytest.approx(-plane_surface.excited.derivative(d))
    assert delta == pytest.approx(plane_surface.excited(d) - plane_surface.ground(d))
    assert g0 > 0
    with pytest.raises(ValueError):
        plane_surface.effective_atom_rates(d, 1.5)
    with pytest.warns(UserWarning):
        plane_surface.effective_atom_rates(1e-5, 0.0)


def test_cache_round_trip(tmp_path):
    settings = cp.SurfaceSettings(points=40)
    first = cp.build_surface_model(settings=settings, cache_dir=tmp_path)
    assert list(tmp_path.glob("surface_*.npz"))
    second = cp.build_surface_model(settings=settings, cache_dir=tmp_path)
    np.testing.assert_array_equal(first.ground.u_rad_us, second.ground.u_rad_us)
    np.testing.assert_array_equal(first.parallel.ratio, second.parallel.ratio)


def test_regime_fit_requires_span():
    settings = cp.SurfaceSettings(d_min_um=0.1, d_max_um=1.0, points=20)
    model = cp.build_surface_model(settings=settings)
    with pytest.raises(ValueError):
        cp.regime_fit(model.ground)
