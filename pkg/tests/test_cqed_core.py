import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wgmtransit import cqed_core as cq

W = 2 * np.pi
rates = st.floats(0.5, 60.0)
detunings = st.floats(-80.0, 80.0)
phases = st.floats(0.0, 2 * np.pi)


def params(g=0.0, theta=0.0, delta=0.0, kappa_i=13.0, kappa_ex=17.0, h=11.0, flux=15.0):
    return cq.CqedParams.from_mhz(kappa_i, kappa_ex, h, 2.617, delta, delta,
                                  g / np.sqrt(2) * np.exp(1j * theta), flux)


def test_negative_rates_rejected():
    with pytest.raises(cq.CqedDomainError):
        cq.CqedParams(-1.0, 1.0, 0.0, 1.0)


def test_singular_system_rejected():
    with pytest.raises(cq.CqedDomainError):
        cq.steady_state_linear(cq.CqedParams(0.0, 0.0, 0.0, 1.0))


def test_zero_input_gives_zero_outputs():
    st_ = cq.steady_state_linear(params(g=30.0, flux=0.0))
    assert st_.zero_input and st_.transmission == 0.0 and st_.reflection == 0.0


def test_critical_coupling_value():
    assert cq.critical_coupling(3.0, 4.0) == pytest.approx(5.0)


@given(ki=rates, h=rates)
def test_bare_critical_coupling_extinguishes(ki, h):
    kex = cq.critical_coupling(ki, h)
    t, _ = cq.transmission(params(kappa_i=ki, kappa_ex=kex, h=h))
    assert t < 1e-10


@given(g=st.floats(0.0, 120.0), theta=phases, delta=detunings)
def test_energy_balance(g, theta, delta):
    """Outputs plus losses never exceed the input: T + R <= 1."""
    s = cq.steady_state_linear(params(g, theta, delta))
    assert 0.0 <= s.transmission and 0.0 <= s.reflection
    assert s.transmission + s.reflection <= 1.0 + 1e-12


@given(g=st.floats(1.0, 120.0), theta=phases, delta=detunings)
def test_amplitudes_solve_drift_equations(g, theta, delta):
    p = params(g, theta, delta)
    s = cq.steady_state_linear(p)
    x = np.array([s.a, s.b, s.sigma])
    rhs = cq.drift_matrix(p) @ x + np.array([-1j * p.drive, 0, 0])
    assert np.max(np.abs(rhs)) < 1e-9 * p.drive


@given(g=st.floats(1.0, 120.0), theta=phases)
def test_phase_shift_symmetry(g, theta):
    """Shifting theta by pi leaves T unchanged (a -> a, b -> b, sigma -> -sigma)."""
    t1, _ = cq.transmission(params(g, theta))
    t2, _ = cq.transmission(params(g, theta + np.pi))
    assert t1 == pytest.approx(t2, rel=1e-9, abs=1e-14)


def test_eigenvalues_sorted_and_stable():
    lam = cq.system_eigenvalues(params(40.0, 0.3, 5.0))
    assert np.all(np.diff(lam.imag) <= 1e-12)
    assert np.all(lam.real < 0)


def test_vacuum_rabi_splitting():
    g_tw = W * 20.0
    p = cq.CqedParams(W * 2.617, 0.0, 0.0, W * 2.617, 0.0, 0.0, g_tw)
    lam = cq.system_eigenvalues(p)
    assert lam[0].imag - lam[-1].imag == pytest.approx(2 * np.sqrt(2) * g_tw, rel=1e-10)


def test_master_equation_trace_and_hermiticity():
    st_, rho = cq.steady_state_full(params(30.0, 0.4, 10.0, flux=0.5), return_density=True)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-10)
    np.testing.assert_allclose(rho, rho.conj().T, atol=1e-12)
    assert np.min(np.linalg.eigvalsh(rho)) > -1e-10
    assert st_.truncation_converged


def test_master_equation_zero_input():
    st_ = cq.steady_state_full(params(30.0, flux=0.0))
    assert st_.zero_input and st_.transmission == 0.0


def test_master_equation_bare_cavity_matches_linear():
    """Without an atom the model is linear, so both solvers agree at any drive."""
    p = params(0.0, flux=50.0, delta=7.0)
    full = cq.steady_state_full(p, fock_cutoff=4, max_cutoff=8, tol=1e-6)
    lin = cq.steady_state_linear(p)
    assert full.transmission == pytest.approx(lin.transmission, rel=1e-3)


def test_fixed_cutoff_reports_top_population():
    _, top = cq.steady_state_fixed_cutoff(params(30.0, flux=0.1), 3)
    assert 0.0 <= top < 1e-6


def test_normal_modes_preserve_norm():
    a, b = 0.3 + 0.1j, -0.2 + 0.5j
    A, B = cq.normal_mode_amplitudes(a, b)
    assert abs(A) ** 2 + abs(B) ** 2 == pytest.approx(abs(a) ** 2 + abs(b) ** 2)
