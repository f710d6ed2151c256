import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wgmtransit import surface_response as sr

SYNTH = sr.LorentzOscillatorSet((40.0, 120.0), (0.15, 11.0), (0.01, 1.2))


@pytest.fixture(scope="module")
def atom():
    return sr.build_atom_response()


def test_calibration_hits_both_targets(atom):
    alpha0 = float(sr.polarizability_imag_axis(atom.ground, 0.0))
    c3 = sr.c3_to_hz_um3(sr.metallic_c3(atom.ground))
    assert alpha0 == pytest.approx(sr.ALPHA0_TARGET_M3, rel=1e-6)
    assert c3 == pytest.approx(sr.METAL_C3_TARGET_HZ_UM3, rel=1e-6)


def test_core_is_shared_between_states(atom):
    assert atom.ground.core_strength == atom.excited.core_strength
    assert atom.ground.core_omega == atom.excited.core_omega
    assert 0.5 < atom.valence_fraction < 1.0


def test_unreachable_targets_raise():
    ground = sr.PolarizabilityModel.from_transitions(
        "ground", sr.load_transitions("cs_ground_transitions.csv"))
    with pytest.raises(sr.CalibrationError):
        sr.calibrate_core(ground, alpha0_m3=1e-31)


@given(xi=st.floats(0.0, 1e18))
def test_polarizability_positive_and_decreasing(atom, xi):
    a = sr.polarizability_imag_axis(atom.ground, xi)
    assert 0 < a <= sr.polarizability_imag_axis(atom.ground, 0.0)


def test_real_and_imag_axis_agree_at_zero(atom):
    assert sr.polarizability_real_axis(atom.ground, 0.0) == pytest.approx(
        sr.polarizability_imag_axis(atom.ground, 0.0))


@given(x1=st.floats(0.0, 1e17), x2=st.floats(0.0, 1e17))
def test_epsilon_imag_axis_monotone(x1, x2):
    lo, hi = sorted((x1, x2))
    e_lo, e_hi = sr.epsilon_imag_axis(SYNTH, lo), sr.epsilon_imag_axis(SYNTH, hi)
    assert e_hi <= e_lo + 1e-12
    assert e_hi >= 1.0


def test_static_value_matches_zero_frequency():
    assert sr.epsilon_imag_axis(SYNTH, 0.0) == pytest.approx(SYNTH.static_value)
    assert sr.epsilon_real_axis(SYNTH, 0.0).real == pytest.approx(SYNTH.static_value)


def test_negative_xi_rejected():
    with pytest.raises(ValueError):
        sr.epsilon_imag_axis(SYNTH, -1.0)


def test_invalid_oscillators_rejected():
    with pytest.raises(ValueError):
        sr.LorentzOscillatorSet((1.0,), (0.0,), (0.1,))


def test_fit_recovers_synthetic_oscillators():
    energy = np.linspace(0.05, 20.0, 400)
    eps = sr.epsilon_real_axis(SYNTH, energy * sr.EV)
    nk = np.sqrt(eps)
    start = (np.array(SYNTH.strength_ev2) * 1.3, np.array(SYNTH.resonance_ev) * 0.9,
             np.array(SYNTH.damping_ev) * 2.0)
    fit = sr.fit_dielectric(energy, nk.real, nk.imag, count=2, initial=start)
    assert fit.residual < 1e-6
    np.testing.assert_allclose(fit.resonance_ev, SYNTH.resonance_ev, rtol=1e-4)
    np.testing.assert_allclose(fit.strength_ev2, SYNTH.strength_ev2, rtol=1e-4)


def test_shipped_fit_describes_table():
    energy, n, k = sr.load_nk_table()
    model = sr.load_oscillators()
    eps_data = (n + 1j * k) ** 2
    eps_model = sr.epsilon_real_axis(model, energy * sr.EV)
    rel = np.abs(eps_model - eps_data) / np.abs(eps_data)
    assert np.sqrt(np.mean(rel**2)) < 0.05
    assert len(model.strength_ev2) == 7


def test_oscillator_file_round_trip(tmp_path):
    path = tmp_path / "osc.yaml"
    sr.save_oscillators(SYNTH, path)
    back = sr.load_oscillators(path)
    assert back.arrays[0].tolist() == list(SYNTH.strength_ev2)
    assert back.to_dict() == SYNTH.to_dict()
