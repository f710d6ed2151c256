"""Response functions of the silica surface and the cesium atom.

Dielectric function of SiO2 from a Lorentz-oscillator fit, and ground /
6P3/2 polarizabilities from transition sums plus a single calibrated core
oscillator. Imaginary-axis frequencies xi are in rad/s; polarizabilities are
SI volumes alpha/(4 pi eps0) in m^3 (multiply by 1e6 for cm^3).
"""

from __future__ import annotations

import csv
import logging
import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
import yaml
from scipy import integrate, optimize, signal

from . import constants as const

log = logging.getLogger(__name__)

EV = const.E_CHARGE / const.HBAR          # rad/s per eV
ALPHA0_TARGET_M3 = 5.942e-29              # ground-state static polarizability
METAL_C3_TARGET_HZ_UM3 = 4.4e3            # C3/h for a perfect conductor


class CalibrationError(RuntimeError):
    pass


class FitError(RuntimeError):
    pass


def data_path(name: str) -> Path:
    return Path(resources.files("wgmtransit") / "data" / name)


# ---------------------------------------------------------------------------
# dielectric function


@dataclass(frozen=True)
class LorentzOscillatorSet:
    """eps(w) = 1 + sum f_j / (w_j^2 - w^2 - i w g_j).

    Strengths in eV^2, resonances and dampings in eV.
    """

    strength_ev2: tuple
    resonance_ev: tuple
    damping_ev: tuple
    residual: float | None = None
    label: str = ""

    def __post_init__(self):
        f, w, g = (np.asarray(x, dtype=float) for x in (self.strength_ev2, self.resonance_ev, self.damping_ev))
        if not (f.shape == w.shape == g.shape):
            raise ValueError("oscillator arrays must have equal length")
        if np.any(f < 0) or np.any(w <= 0) or np.any(g < 0):
            raise ValueError("oscillators need f >= 0, w > 0, g >= 0")

    @property
    def arrays(self):
        return (np.asarray(self.strength_ev2, float), np.asarray(self.resonance_ev, float),
                np.asarray(self.damping_ev, float))

    @property
    def static_value(self) -> float:
        f, w, _ = self.arrays
        return float(1.0 + np.sum(f / w**2))

    def to_dict(self):
        return {
            "format": "wgmtransit-lorentz-oscillators",
            "version": 1,
            "label": self.label,
            "units": {"strength": "eV^2", "resonance": "eV", "damping": "eV"},
            "residual_rms": self.residual,
            "oscillators": [
                {"strength_eV2": float(f), "resonance_eV": float(w), "damping_eV": float(g)}
                for f, w, g in zip(*self.arrays)
            ],
        }

    @classmethod
    def from_dict(cls, d):
        osc = d["oscillators"]
        return cls(tuple(o["strength_eV2"] for o in osc), tuple(o["resonance_eV"] for o in osc),
                   tuple(o["damping_eV"] for o in osc), d.get("residual_rms"), d.get("label", ""))


def save_oscillators(model: LorentzOscillatorSet, path) -> None:
    Path(path).write_text(yaml.safe_dump(model.to_dict(), sort_keys=False))


def load_oscillators(path=None) -> LorentzOscillatorSet:
    """Load an oscillator set; defaults to the shipped seven-term silica fit."""
    path = data_path("silica_oscillators.yaml") if path is None else Path(path)
    return LorentzOscillatorSet.from_dict(yaml.safe_load(Path(path).read_text()))


def epsilon_real_axis(model: LorentzOscillatorSet, omega_rad_s):
    """Complex eps at real angular frequency (rad/s)."""
    e = np.asarray(omega_rad_s, dtype=float)[..., None] / EV
    f, w, g = model.arrays
    return 1.0 + (f / (w**2 - e**2 - 1j * g * e)).sum(-1)


def epsilon_imag_axis(model: LorentzOscillatorSet, xi_rad_s):
    """Real eps(i xi) = 1 + sum f / (w^2 + xi^2 + xi g) for xi >= 0 (rad/s)."""
    x = np.asarray(xi_rad_s, dtype=float)
    if np.any(x < 0):
        raise ValueError("xi must be non-negative")
    e = x[..., None] / EV
    f, w, g = model.arrays
    return 1.0 + (f / (w**2 + e**2 + g * e)).sum(-1)


def load_nk_table(path=None):
    """(energy_eV, n, k) from the shipped silica table or a compatible CSV."""
    path = data_path("silica_reference_nk.csv") if path is None else Path(path)
    rows = [r for r in csv.reader(l for l in Path(path).read_text().splitlines()
                                  if l and not l.startswith("#"))]
    head = rows[0]
    data = np.array(rows[1:], dtype=float)
    col = {name: i for i, name in enumerate(head)}
    return data[:, col["energy_eV"]], data[:, col["n"]], data[:, col["k"]]


def _initial_guess(energy, eps2, count):
    """Place oscillators on the strongest peaks of eps2 and size them by sum rule."""
    logy = np.log(np.maximum(eps2, 1e-12))
    peaks, props = signal.find_peaks(logy, prominence=0.05)
    order = np.argsort(props["prominences"])[::-1] if len(peaks) else []
    centres = list(energy[peaks[order[:count]]]) if len(peaks) else []
    # pad with log-spaced centres inside the populated decades
    extra = np.geomspace(energy[0] * 2, energy[-1] / 2, count + 2)[1:-1]
    for e in extra:
        if len(centres) >= count:
            break
        if all(abs(np.log(e / c)) > 0.3 for c in centres):
            centres.append(e)
    centres = np.sort(np.array(centres[:count]))
    # partition the sum rule int w eps2 dw = (pi/2) f between neighbouring centres
    edges = np.concatenate([[energy[0]], np.sqrt(centres[1:] * centres[:-1]), [energy[-1]]])
    strength = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        m = (energy >= lo) & (energy <= hi)
        val = integrate.trapezoid(energy[m] * eps2[m], energy[m]) if m.sum() > 1 else 0.0
        strength.append(max(2.0 / np.pi * val, 1e-6 * centres.mean() ** 2))
    damping = 0.1 * centres
    return np.array(strength), centres, damping


def fit_dielectric(energy_ev, n, k, count: int = 7, initial=None, label: str = "",
                   max_nfev: int = 20000) -> LorentzOscillatorSet:
    """Least-squares Lorentz fit of eps = (n + i k)^2 over a tabulated spectrum.

    Residuals are (eps_model - eps_data)/|eps_data| for real and imaginary
    parts; parameters are fitted in log space to keep them positive.

    Parameters
    ----------
    initial : (strength, resonance, damping), optional
        Starting point; defaults to a peak-finding heuristic on eps2.
    """
    energy = np.asarray(energy_ev, dtype=float)
    eps = (np.asarray(n) + 1j * np.asarray(k)) ** 2
    scale = np.abs(eps)
    if initial is None:
        initial = _initial_guess(energy, eps.imag, count)
    f0, w0, g0 = (np.asarray(x, dtype=float) for x in initial)
    p0 = np.log(np.concatenate([f0, w0, g0]))

    def model(p):
        f, w, g = np.exp(p).reshape(3, -1)
        e = energy[:, None]
        return 1.0 + (f / (w**2 - e**2 - 1j * g * e)).sum(-1)

    def resid(p):
        r = (model(p) - eps) / scale
        return np.concatenate([r.real, r.imag])

    sol = optimize.least_squares(resid, p0, method="trf", x_scale="jac", max_nfev=max_nfev,
                                 xtol=1e-12, ftol=1e-12, gtol=1e-12)
    if not np.all(np.isfinite(sol.x)):
        raise FitError("dielectric fit diverged")
    rms = float(np.sqrt(np.mean(sol.fun**2)))
    f, w, g = np.exp(sol.x).reshape(3, -1)
    order = np.argsort(w)
    log.info("dielectric fit: %d oscillators, rms relative residual %.3e (%s)",
             count, rms, sol.message)
    return LorentzOscillatorSet(tuple(f[order]), tuple(w[order]), tuple(g[order]), rms, label)


# ---------------------------------------------------------------------------
# polarizability


@dataclass(frozen=True)
class Transition:
    partner: str
    wavelength_nm: float
    oscillator_strength: float

    @property
    def omega(self) -> float:
        return float(const.wavelength_nm_to_rad_s(self.wavelength_nm))


def load_transitions(name: str):
    """Read a transition CSV from the data directory (or a path)."""
    path = Path(name) if Path(name).exists() else data_path(name)
    lines = [l for l in path.read_text().splitlines() if l and not l.startswith("#")]
    out = []
    for row in csv.DictReader(lines):
        out.append(Transition(row["partner"], float(row["wavelength_nm"]),
                              float(row["oscillator_strength"])))
    return out


@dataclass(frozen=True)
class PolarizabilityModel:
    """alpha(w) = sum K f_n/(w_n^2 - w^2) + K f_core/(w_core^2 - w^2).

    K = e^2/(4 pi eps0 m_e). ``state`` is a tag ("ground" or "excited").
    """

    state: str
    valence_strength: tuple
    valence_omega: tuple
    core_strength: float = 0.0
    core_omega: float = 1.0
    degenerate_core: bool = False

    @property
    def arrays(self):
        return np.asarray(self.valence_strength, float), np.asarray(self.valence_omega, float)

    def with_core(self, f_core, w_core, degenerate=False) -> "PolarizabilityModel":
        return PolarizabilityModel(self.state, self.valence_strength, self.valence_omega,
                                   float(f_core), float(w_core), degenerate)

    @classmethod
    def from_transitions(cls, state, transitions):
        return cls(state, tuple(t.oscillator_strength for t in transitions),
                   tuple(t.omega for t in transitions))


def polarizability_imag_axis(model: PolarizabilityModel, xi_rad_s, include_core=True):
    """alpha(i xi) in m^3."""
    x2 = np.asarray(xi_rad_s, dtype=float)[..., None] ** 2
    f, w = model.arrays
    val = (const.POL_K * f / (w**2 + x2)).sum(-1)
    if include_core:
        val = val + const.POL_K * model.core_strength / (model.core_omega**2 + x2[..., 0])
    return val


def polarizability_real_axis(model: PolarizabilityModel, omega_rad_s, include_core=True):
    """Off-resonant alpha(w) in m^3 at a real frequency (no damping)."""
    w2 = np.asarray(omega_rad_s, dtype=float)[..., None] ** 2
    f, w = model.arrays
    val = (const.POL_K * f / (w**2 - w2)).sum(-1)
    if include_core:
        val = val + const.POL_K * model.core_strength / (model.core_omega**2 - w2[..., 0])
    return val


def imag_axis_integral(func, xi0: float = 1e15, rtol: float = 1e-11) -> float:
    """int_0^inf func(xi) dxi with xi = xi0 t/(1-t)."""
    def integrand(t):
        xi = xi0 * t / (1.0 - t)
        return func(xi) * xi0 / (1.0 - t) ** 2
    val, err = integrate.quad(integrand, 0.0, 1.0, epsrel=rtol, epsabs=0.0, limit=500)
    return val


def metallic_c3(model: PolarizabilityModel, include_core=True) -> float:
    """Perfect-conductor C3 = (hbar/4pi) int alpha(i xi) dxi, in J m^3."""
    # split the integral at the scale of each oscillator family for accuracy
    f = lambda xi: float(polarizability_imag_axis(model, xi, include_core))
    return const.HBAR / (4.0 * np.pi) * imag_axis_integral(f)


def c3_to_hz_um3(c3_j_m3: float) -> float:
    return c3_j_m3 / const.H_PLANCK * 1e18


def calibrate_core(model: PolarizabilityModel, alpha0_m3: float = ALPHA0_TARGET_M3,
                   c3_hz_um3: float = METAL_C3_TARGET_HZ_UM3, tol: float = 1e-12):
    """Fit the single core oscillator to the static polarizability and metallic C3.

    Returns (f_core, omega_core). For one undamped oscillator the two
    conditions alpha_c(0) = K f/w^2 and int alpha_c dxi = pi K f/(2 w) have a
    unique positive solution whenever both residual targets are positive.
    """
    a_val = float(polarizability_imag_axis(model, 0.0, include_core=False))
    i_val = 4.0 * np.pi / const.HBAR * metallic_c3(model, include_core=False)
    i_target = 4.0 * np.pi / const.HBAR * c3_hz_um3 * const.H_PLANCK * 1e-18
    a_core = alpha0_m3 - a_val
    i_core = i_target - i_val
    if abs(a_core) <= tol * alpha0_m3 and abs(i_core) <= tol * i_target:
        warnings.warn("valence terms already satisfy both targets; core term is degenerate")
        return 0.0, 1.0, True
    if a_core <= 0 or i_core <= 0:
        raise CalibrationError(
            f"no positive core solution: residual alpha(0) {a_core:.3e} m^3, "
            f"residual integral {i_core:.3e} m^3/s")
    w_core = 2.0 * i_core / (np.pi * a_core)
    f_core = a_core * w_core**2 / const.POL_K
    return float(f_core), float(w_core), False


@dataclass(frozen=True)
class AtomResponse:
    """Calibrated ground and 6P3/2 polarizability models sharing one core term."""

    ground: PolarizabilityModel
    excited: PolarizabilityModel

    @property
    def valence_fraction(self) -> float:
        g = self.ground
        return float(polarizability_imag_axis(g, 0.0, include_core=False)
                     / polarizability_imag_axis(g, 0.0))


def build_atom_response(ground_file="cs_ground_transitions.csv",
                        excited_file="cs_6p32_transitions.csv",
                        alpha0_m3=ALPHA0_TARGET_M3, c3_hz_um3=METAL_C3_TARGET_HZ_UM3) -> AtomResponse:
    ground = PolarizabilityModel.from_transitions("ground", load_transitions(ground_file))
    excited = PolarizabilityModel.from_transitions("excited", load_transitions(excited_file))
    f_core, w_core, degenerate = calibrate_core(ground, alpha0_m3, c3_hz_um3)
    return AtomResponse(ground.with_core(f_core, w_core, degenerate),
                        excited.with_core(f_core, w_core, degenerate))


def core_sensitivity(model: PolarizabilityModel, rel_step: float = 0.01):
    """Finite-difference response of (f_core, w_core) to a relative change of alpha(0)."""
    f0, w0, _ = calibrate_core(model)
    f1, w1, _ = calibrate_core(model, alpha0_m3=ALPHA0_TARGET_M3 * (1 + rel_step))
    return {"f_core": f0, "omega_core": w0,
            "df_rel": (f1 - f0) / f0, "dw_rel": (w1 - w0) / w0}
