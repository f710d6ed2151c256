"""Atom-surface dispersion potentials and surface-modified decay rates.

Potentials follow the finite-temperature Lifshitz sum over Matsubara
frequencies for a planar or cylindrical dielectric surface. Results are carried
as U/hbar in rad/us with distances in um. Curves are tabulated once on a
log-spaced distance grid and evaluated through a cubic Hermite interpolant of
y = U d^3 in x = ln d, which keeps the dynamic range tame and gives an analytic
derivative for the surface force.
"""

from __future__ import annotations

import hashlib
import json
import logging
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from enum import Enum
from pathlib import Path

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from . import constants as const
from . import surface_response as sr

log = logging.getLogger(__name__)

CACHE_VERSION = 1


class ConvergenceError(RuntimeError):
    """A Matsubara sum or wavevector integral did not converge within its caps."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class RegimeWarning(UserWarning):
    """A fitted power law departs from the expected regime exponent."""


class AtomState(str, Enum):
    GROUND = "ground"
    EXCITED = "excited"


class Orientation(str, Enum):
    PARALLEL = "parallel"            # dipole in the plane of the surface
    PERPENDICULAR = "perpendicular"  # dipole along the surface normal


@dataclass(frozen=True)
class SurfaceGeometry:
    """Plane (radius None) or cylinder of curvature radius ``radius_um``."""

    radius_um: float | None = None

    def __post_init__(self):
        if self.radius_um is not None and not self.radius_um > 0:
            raise ValueError("cylinder radius must be positive")

    @property
    def kind(self) -> str:
        return "plane" if self.radius_um is None else "cylinder"

    @classmethod
    def plane(cls) -> "SurfaceGeometry":
        return cls(None)

    @classmethod
    def cylinder(cls, radius_um: float) -> "SurfaceGeometry":
        return cls(float(radius_um))


# ---------------------------------------------------------------------------
# log-grid Hermite tables


@dataclass(frozen=True)
class LogGridTable:
    """Cubic Hermite table of y(x), x = ln(d/um) on a uniform grid.

    The tabulated quantity is Q(d) = y(ln d) * d**(-power).
    """

    x0: float
    dx: float
    values: np.ndarray
    slopes: np.ndarray
    power: float

    @classmethod
    def build(cls, d_um, q, power: float) -> "LogGridTable":
        d_um = np.asarray(d_um, float)
        x = np.log(d_um)
        steps = np.diff(x)
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
            raise ValueError("table grid must be uniform in ln d")
        y = np.asarray(q, float) * d_um**power
        spline = CubicSpline(x, y)
        return cls(float(x[0]), float(steps[0]), y, spline(x, 1), float(power))

    @property
    def d_min(self) -> float:
        return float(np.exp(self.x0))

    @property
    def d_max(self) -> float:
        return float(np.exp(self.x0 + self.dx * (len(self.values) - 1)))

    @property
    def d_um(self) -> np.ndarray:
        return np.exp(self.x0 + self.dx * np.arange(len(self.values)))

    def _hermite(self, d):
        x = np.log(d)
        s = (x - self.x0) / self.dx
        i = np.clip(np.floor(s).astype(int), 0, len(self.values) - 2)
        t = s - i
        y0, y1 = self.values[i], self.values[i + 1]
        m0, m1 = self.slopes[i] * self.dx, self.slopes[i + 1] * self.dx
        t2, t3 = t * t, t * t * t
        y = ((2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0
             + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * m1)
        dy = ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * m0
              + (-6 * t2 + 6 * t) * y1 + (3 * t2 - 2 * t) * m1) / self.dx
        return y, dy

    def __call__(self, d_um):
        d = np.asarray(d_um, float)
        y, _ = self._hermite(d)
        return y * d ** (-self.power)

    def derivative(self, d_um):
        """dQ/dd in table units per um."""
        d = np.asarray(d_um, float)
        y, dy = self._hermite(d)
        return (dy - self.power * y) * d ** (-self.power - 1.0)


def log_grid(d_min_um: float = 1e-3, d_max_um: float = 20.0, points: int = 200) -> np.ndarray:
    return np.exp(np.linspace(np.log(d_min_um), np.log(d_max_um), points))


# ---------------------------------------------------------------------------
# Lifshitz sum

_LAGUERRE_X, _LAGUERRE_W = np.polynomial.laguerre.laggauss(60)


def matsubara_spacing(temperature_k: float) -> float:
    """xi_1 = 2 pi k_B T / hbar in rad/s."""
    return const.TWO_PI * const.K_B * temperature_k / const.HBAR


def default_matsubara_cap(d_um: float, temperature_k: float, xi_max: float | None = None,
                          minimum: int = 64) -> int:
    """Number of Matsubara terms needed for distance d.

    Terms decay like exp(-2 xi d / c) and, independent of d, once xi exceeds
    the highest material/atomic resonance. ``xi_max`` is that resonance scale
    (rad/s); the cap is the smaller of 40 decay lengths and 200 xi_max.
    """
    xi1 = matsubara_spacing(temperature_k)
    n_ret = 40.0 * const.C_LIGHT / (2.0 * d_um * 1e-6 * xi1)
    n = n_ret if xi_max is None else min(n_ret, 200.0 * xi_max / xi1)
    return int(max(minimum, np.ceil(n)))


def _matsubara_terms(alpha_fn, eps_fn, d_m, radius_m, xi):
    """Per-frequency contributions alpha * I(xi) in m^3 * m^-3 (units of 1)."""
    a = np.asarray(alpha_fn(xi), float)
    e = np.asarray(eps_fn(xi), float)
    kz0 = xi / const.C_LIGHT
    q = kz0[:, None] + _LAGUERRE_X[None, :] / (2.0 * d_m)
    kn = np.sqrt(q**2 + (e[:, None] - 1.0) * kz0[:, None] ** 2)
    r_p = (e[:, None] * q - kn) / (e[:, None] * q + kn)
    r_s = (kn - q) / (kn + q)
    ratio = (kz0[:, None] / q) ** 2
    bracket = q if radius_m is None else q - 1.0 / (4.0 * (radius_m + d_m))
    integrand = q * bracket * (2.0 * r_p + ratio * (r_s - r_p))
    integral = integrand @ _LAGUERRE_W * np.exp(-2.0 * kz0 * d_m) / (2.0 * d_m)
    return a * integral


def lifshitz_potential(alpha_fn, eps_fn, d_um, geometry: SurfaceGeometry | None = None,
                       temperature_k: float = 300.0, n_cap: int | None = None,
                       xi_max: float | None = None, rtol: float = 1e-9,
                       chunk: int = 4096) -> np.ndarray:
    """Casimir-Polder potential U/hbar (rad/us) at distances d (um).

    Parameters
    ----------
    alpha_fn, eps_fn : callable
        alpha(i xi) in m^3 and eps(i xi), vectorised over xi in rad/s.
    geometry : SurfaceGeometry
        Plane by default; a cylinder adds the curvature prefactor and bracket.
    n_cap : int, optional
        Highest Matsubara index; by default chosen per distance.
    rtol : float
        The final block of terms must be below ``rtol`` of the running sum,
        otherwise ConvergenceError is raised with the partial sums.
    """
    geometry = geometry or SurfaceGeometry.plane()
    if temperature_k <= 0:
        raise ValueError("temperature must be positive")
    d_arr = np.atleast_1d(np.asarray(d_um, float))
    if np.any(d_arr <= 0):
        raise ValueError("distance must be positive")
    xi1 = matsubara_spacing(temperature_k)
    out = np.empty_like(d_arr)
    for j, d in enumerate(d_arr):
        d_m = d * 1e-6
        radius_m = None if geometry.radius_um is None else geometry.radius_um * 1e-6
        n_max = n_cap if n_cap is not None else default_matsubara_cap(d, temperature_k, xi_max)
        total = 0.0
        trace = []
        last = 0.0
        for start in range(0, n_max + 1, chunk):
            n = np.arange(start, min(start + chunk, n_max + 1))
            terms = _matsubara_terms(alpha_fn, eps_fn, d_m, radius_m, n * xi1)
            if start == 0:
                terms[0] *= 0.5
            last = float(terms.sum())
            total += last
            trace.append((int(n[-1]), total))
        if not np.isfinite(total):
            raise ConvergenceError(f"non-finite Matsubara sum at d={d} um", trace)
        tail = abs(float(terms[-1])) * len(terms)
        if n_cap is None and tail > rtol * abs(total) and len(trace) > 0:
            raise ConvergenceError(
                f"Matsubara sum not converged at d={d} um: last-block estimate {tail:.3e} "
                f"vs total {total:.3e} after {n_max} terms", trace)
        pref = 1.0 if geometry.radius_um is None else np.sqrt(geometry.radius_um / (geometry.radius_um + d))
        energy = -const.K_B * temperature_k * pref * total      # J
        out[j] = energy / const.HBAR * const.US
    return out if np.ndim(d_um) else out[0]


def nonretarded_c3(alpha_fn, eps_fn) -> float:
    """C3/h (Hz um^3) of the zero-temperature, non-retarded limit."""
    def f(xi):
        e = float(eps_fn(xi))
        return float(alpha_fn(xi)) * (e - 1.0) / (e + 1.0)
    c3 = const.HBAR / (4.0 * np.pi) * sr.imag_axis_integral(f)
    return sr.c3_to_hz_um3(c3)


# ---------------------------------------------------------------------------
# curves and regime fits


@dataclass(frozen=True)
class SurfacePotentialCurve:
    """Tabulated U/hbar(d) for one state, geometry and temperature."""

    geometry: SurfaceGeometry
    state: AtomState
    temperature_k: float
    d_um: np.ndarray
    u_rad_us: np.ndarray
    table: LogGridTable = field(repr=False)

    @classmethod
    def from_samples(cls, geometry, state, temperature_k, d_um, u_rad_us):
        d_um = np.asarray(d_um, float)
        u = np.asarray(u_rad_us, float)
        return cls(geometry, AtomState(state), float(temperature_k), d_um, u,
                   LogGridTable.build(d_um, u, power=3.0))

    def __call__(self, d_um):
        return self.table(d_um)

    def derivative(self, d_um):
        return self.table.derivative(d_um)


@dataclass(frozen=True)
class DecayRateCurve:
    """Tabulated gamma_s/gamma_0 for one dipole orientation."""

    orientation: Orientation
    d_um: np.ndarray
    ratio: np.ndarray
    table: LogGridTable = field(repr=False)

    @classmethod
    def from_samples(cls, orientation, d_um, ratio):
        d_um = np.asarray(d_um, float)
        r = np.asarray(ratio, float)
        return cls(Orientation(orientation), d_um, r, LogGridTable.build(d_um, r, power=0.0))

    def __call__(self, d_um):
        return self.table(d_um)


@dataclass(frozen=True)
class PowerLawFit:
    power: float
    coefficient_hz: float      # C/h in Hz um^power
    slope: float
    window_um: tuple


@dataclass(frozen=True)
class RegimeFit:
    lennard_jones: PowerLawFit
    retarded: PowerLawFit
    thermal: PowerLawFit

    @property
    def c3_hz_um3(self) -> float:
        return self.lennard_jones.coefficient_hz

    @property
    def c4_hz_um4(self) -> float:
        return self.retarded.coefficient_hz

    @property
    def thermal_hz_um3(self) -> float:
        return self.thermal.coefficient_hz


REGIME_WINDOWS = {
    "lennard_jones": (0.0, 0.005, 3.0),
    "retarded": (0.4, 1.5, 4.0),
    "thermal": (10.0, np.inf, 3.0),
}


def power_law_fit(d_um, u_rad_us, lo, hi, power, slope_tol: float = 0.3) -> PowerLawFit:
    """Fit |U| = C d^-p inside [lo, hi]; C from the geometric mean of |U| d^p."""
    d = np.asarray(d_um, float)
    u = np.abs(np.asarray(u_rad_us, float))
    m = (d >= lo) & (d <= hi)
    if m.sum() < 2:
        raise ValueError(f"fewer than two samples in window [{lo}, {hi}] um")
    coeff = np.exp(np.mean(np.log(u[m] * d[m] ** power)))
    slope = np.polyfit(np.log(d[m]), np.log(u[m]), 1)[0]
    if abs(slope + power) > slope_tol:
        warnings.warn(f"slope {slope:.2f} in [{lo}, {hi}] um departs from -{power:g}",
                      RegimeWarning, stacklevel=2)
    return PowerLawFit(power, float(coeff * 1e6 / const.TWO_PI), float(slope),
                       (float(d[m].min()), float(d[m].max())))


def regime_fit(curve: SurfacePotentialCurve, windows=None) -> RegimeFit:
    """Lennard-Jones, retarded and thermal power-law coefficients of a curve."""
    windows = windows or REGIME_WINDOWS
    d, u = curve.d_um, curve.u_rad_us
    if d.min() > 0.0101 or d.max() < 19.9:
        raise ValueError("curve must span 0.01-20 um for the regime fit")
    fits = {name: power_law_fit(d, u, *windows[name]) for name in
            ("lennard_jones", "retarded", "thermal")}
    return RegimeFit(**fits)


# ---------------------------------------------------------------------------
# excited-state resonant term


def smooth_window(d_um, start_um, stop_um):
    """C1 taper: 1 below start, 0 above stop, cubic smoothstep between."""
    d = np.asarray(d_um, float)
    t = np.clip((d - start_um) / (stop_um - start_um), 0.0, 1.0)
    return 1.0 - t * t * (3.0 - 2.0 * t)


def smooth_window_derivative(d_um, start_um, stop_um):
    d = np.asarray(d_um, float)
    width = stop_um - start_um
    t = np.clip((d - start_um) / width, 0.0, 1.0)
    return -6.0 * t * (1.0 - t) / width


def resonant_c3(excited: sr.PolarizabilityModel, oscillators: sr.LorentzOscillatorSet,
                scale: float = 1.0) -> float:
    """Resonant near-field coefficient of the excited state as C/hbar (rad/us um^3).

    Sums hbar K |f| Re[(eps-1)/(eps+1)] / (4 omega) over downward partners
    (negative oscillator strength), with eps at each emission frequency.
    """
    f, w = excited.arrays
    down = f < 0
    if not down.any():
        return 0.0
    eps = sr.epsilon_real_axis(oscillators, w[down])
    s_re = np.real((eps - 1.0) / (eps + 1.0))
    c3_joule_m3 = np.sum(const.HBAR * const.POL_K * np.abs(f[down]) * s_re / (4.0 * w[down]))
    return float(scale * c3_joule_m3 / const.HBAR * const.US * 1e18)


def resonant_potential(d_um, c3_rad_us_um3: float, wavelength_um: float, geometry=None):
    """Windowed resonant term -C3 w(d)/d^3 (rad/us), including the curvature prefactor."""
    d = np.asarray(d_um, float)
    u = -c3_rad_us_um3 * smooth_window(d, 0.5 * wavelength_um, wavelength_um) / d**3
    if geometry is not None and geometry.radius_um is not None:
        u = u * np.sqrt(geometry.radius_um / (geometry.radius_um + d))
    return u


# ---------------------------------------------------------------------------
# decay rates near a half-space


def _reflection(eps, s):
    """(r_s, r_p) as functions of the in-plane direction sine s (complex)."""
    if np.isinf(eps):
        return -1.0 + 0j, 1.0 + 0j
    sz = np.sqrt(1.0 - s * s + 0j)
    sz2 = np.sqrt(eps - s * s + 0j)
    if sz2.imag < 0:
        sz2 = -sz2
    r_s = (sz - sz2) / (sz + sz2)
    r_p = (eps * sz - sz2) / (eps * sz + sz2)
    return r_s, r_p


def modified_decay_rates(eps, d_um, wavelength_um: float, limit: int = 400):
    """Surface-modified decay ratios (parallel, perpendicular) at distance d.

    ``eps`` is the complex dielectric constant at the transition frequency;
    ``np.inf`` gives the perfect mirror. Parallel means a dipole lying in the
    plane of the surface.
    """
    d = float(d_um)
    if d < 0:
        raise ValueError("distance must be non-negative")
    eps = complex(eps) if not np.isinf(eps) else np.inf
    k = const.TWO_PI / wavelength_um
    x = 2.0 * k * d

    def prop(t, which):
        s, sz = np.sin(t), np.cos(t)
        r_s, r_p = _reflection(eps, s)
        phase = np.exp(1j * x * sz)
        if which == "perp":
            return (s**3 * r_p * phase).real
        return (s * (r_s - sz * sz * r_p) * phase).real

    def evan(tau, which):
        s, sh = np.cosh(tau), np.sinh(tau)
        r_s, r_p = _reflection(eps, s)
        damp = np.exp(-x * sh)
        if which == "perp":
            return (-1j * s**3 * r_p).real * damp
        return (-1j * (r_s + sh * sh * r_p)).real * s * damp

    if d == 0.0:
        if np.isinf(eps) or eps.imag > 0:
            tau_max = np.inf
        else:
            tau_max = float(np.arccosh(max(np.sqrt(eps.real), 1.0)))
    else:
        tau_max = float(np.arcsinh(40.0 / x))
    if d == 0.0 and not np.isfinite(tau_max):
        if np.isinf(eps):
            return 0.0, 2.0
        return np.inf, np.inf

    out = {}
    for which in ("par", "perp"):
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                p, _ = integrate.quad(prop, 0.0, np.pi / 2, args=(which,), limit=limit,
                                      epsabs=1e-12, epsrel=1e-10)
                pts = None
                if not np.isinf(eps):
                    root = float(np.arccosh(max(np.sqrt(abs(eps)), 1.0 + 1e-12)))
                    pts = [root] if 0 < root < tau_max else None
                e, _ = integrate.quad(evan, 0.0, tau_max, args=(which,), limit=limit,
                                      epsabs=1e-12, epsrel=1e-10, points=pts)
            except integrate.IntegrationWarning as exc:
                raise ConvergenceError(f"decay-rate integral failed at d={d} um: {exc}") from exc
        out[which] = p + e
    return 1.0 + 0.75 * out["par"], 1.0 + 1.5 * out["perp"]


def isotropic_rate(parallel, perpendicular):
    """Orientation average (2 gamma_par + gamma_perp) / 3."""
    return (2.0 * np.asarray(parallel) + np.asarray(perpendicular)) / 3.0


# ---------------------------------------------------------------------------
# tabulated surface model


@dataclass(frozen=True)
class SurfaceSettings:
    temperature_k: float = 300.0
    d_min_um: float = 1e-3
    d_max_um: float = 20.0
    points: int = 200
    resonant_scale: float = 1.0
    wavelength_nm: float = const.CS_D2_WAVELENGTH_NM


@dataclass(frozen=True)
class SurfaceModel:
    """Ground/excited potentials and decay ratios tabulated for one geometry."""

    geometry: SurfaceGeometry
    settings: SurfaceSettings
    ground: SurfacePotentialCurve
    excited: SurfacePotentialCurve
    parallel: DecayRateCurve
    perpendicular: DecayRateCurve

    @property
    def d_um(self) -> np.ndarray:
        return self.ground.d_um

    @cached_property
    def isotropic(self) -> LogGridTable:
        return LogGridTable.build(self.d_um, isotropic_rate(self.parallel.ratio,
                                                            self.perpendicular.ratio), 0.0)

    def level_shift(self, d_um):
        """delta_a(d) = (U_ex - U_g)/hbar in rad/us."""
        return self.excited(d_um) - self.ground(d_um)

    def _clamp(self, d_um):
        d = np.asarray(d_um, float)
        lo, hi = self.ground.table.d_min, self.ground.table.d_max
        if np.any((d < lo) | (d > hi)):
            warnings.warn(f"surface distance outside table [{lo:g}, {hi:g}] um; clamped",
                          stacklevel=3)
        return np.clip(d, lo, hi)

    def effective_atom_rates(self, d_um, population, normal=None):
        """Decay ratio, level shift and population-weighted surface force.

        Parameters
        ----------
        d_um : float or array
            Distance to the surface.
        population : float or array
            Excited-state population |<sigma>|^2 in [0, 1].
        normal : array, optional
            Outward unit normal(s), last axis of length 2 (rho, z). Without
            it the force is returned as the scalar component along the normal.

        Returns
        -------
        gamma_ratio, delta_a (rad/us), force/hbar (rad/us/um)
        """
        p = np.asarray(population, float)
        if np.any((p < 0) | (p > 1)):
            raise ValueError("population must lie in [0, 1]")
        d = self._clamp(d_um)
        gamma = self.isotropic(d)
        delta = self.level_shift(d)
        f_g = -self.ground.derivative(d)
        f_e = -self.excited.derivative(d)
        f_n = f_g * (1.0 - p) + f_e * p
        if normal is None:
            return gamma, delta, f_n
        return gamma, delta, np.asarray(f_n)[..., None] * np.asarray(normal, float)


def _hash_inputs(geometry, settings, atom: sr.AtomResponse, oscillators: sr.LorentzOscillatorSet) -> str:
    blob = json.dumps({
        "version": CACHE_VERSION,
        "geometry": geometry.radius_um,
        "settings": settings.__dict__,
        "ground": [atom.ground.valence_strength, atom.ground.valence_omega,
                   atom.ground.core_strength, atom.ground.core_omega],
        "excited": [atom.excited.valence_strength, atom.excited.valence_omega],
        "eps": [oscillators.strength_ev2, oscillators.resonance_ev, oscillators.damping_ev],
    }, sort_keys=True, default=float)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _xi_max(atom: sr.AtomResponse, oscillators: sr.LorentzOscillatorSet) -> float:
    w = max(atom.ground.core_omega, max(atom.ground.valence_omega),
            max(oscillators.resonance_ev) * sr.EV)
    return float(w)


def build_surface_model(geometry: SurfaceGeometry | None = None,
                        settings: SurfaceSettings | None = None,
                        atom: sr.AtomResponse | None = None,
                        oscillators: sr.LorentzOscillatorSet | None = None,
                        cache_dir=None) -> SurfaceModel:
    """Tabulate potentials and decay ratios, reusing a cache file when present."""
    geometry = geometry or SurfaceGeometry.plane()
    settings = settings or SurfaceSettings()
    atom = atom or sr.build_atom_response()
    oscillators = oscillators or sr.load_oscillators()
    key = _hash_inputs(geometry, settings, atom, oscillators)
    cache_file = None
    if cache_dir is not None:
        cache_file = Path(cache_dir) / f"surface_{key}.npz"
        if cache_file.exists():
            data = np.load(cache_file)
            log.info("loaded surface tables from %s", cache_file)
            return _assemble(geometry, settings, data["d"], data["ug"], data["ue"],
                             data["gpar"], data["gperp"])

    d = log_grid(settings.d_min_um, settings.d_max_um, settings.points)
    eps_fn = lambda xi: sr.epsilon_imag_axis(oscillators, xi)
    xi_max = _xi_max(atom, oscillators)
    ug = lifshitz_potential(lambda xi: sr.polarizability_imag_axis(atom.ground, xi), eps_fn,
                            d, geometry, settings.temperature_k, xi_max=xi_max)
    ue = lifshitz_potential(lambda xi: sr.polarizability_imag_axis(atom.excited, xi), eps_fn,
                            d, geometry, settings.temperature_k, xi_max=xi_max)
    lam_um = settings.wavelength_nm * 1e-3
    c3_res = resonant_c3(atom.excited, oscillators, settings.resonant_scale)
    ue = ue + resonant_potential(d, c3_res, lam_um, geometry)
    eps_a = complex(sr.epsilon_real_axis(oscillators, const.wavelength_nm_to_rad_s(settings.wavelength_nm)))
    rates = np.array([modified_decay_rates(eps_a, di, lam_um) for di in d])
    if cache_file is not None:
        cache_file.parent.mkdir(parents=True, exist_ok=True)
        np.savez(cache_file, d=d, ug=ug, ue=ue, gpar=rates[:, 0], gperp=rates[:, 1])
    return _assemble(geometry, settings, d, ug, ue, rates[:, 0], rates[:, 1])


def _assemble(geometry, settings, d, ug, ue, gpar, gperp) -> SurfaceModel:
    t = settings.temperature_k
    return SurfaceModel(
        geometry, settings,
        SurfacePotentialCurve.from_samples(geometry, AtomState.GROUND, t, d, ug),
        SurfacePotentialCurve.from_samples(geometry, AtomState.EXCITED, t, d, ue),
        DecayRateCurve.from_samples(Orientation.PARALLEL, d, gpar),
        DecayRateCurve.from_samples(Orientation.PERPENDICULAR, d, gperp),
    )
