"""Toroid geometry, whispering-gallery mode profiles and atom-cavity coupling.

Positions are cylindrical (rho, phi, z) in um with the toroid axis along z and
the equatorial plane at z = 0. The mode profile f(rho, z) is dimensionless and
equals 1 at the surface point of the equator for the analytic mode.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from numpy.polynomial import hermite as npherm
from scipy import integrate

from . import constants as const


class ModeDomainError(ValueError):
    """Raised when a mode is queried outside its domain of definition."""


class QuadratureError(RuntimeError):
    """Raised when a numerical integral fails to reach the requested accuracy."""


@dataclass(frozen=True)
class ToroidGeometry:
    """Torus of minor diameter D_m swept around the z axis.

    Parameters
    ----------
    principal_diameter_um : float
        Outer (principal) diameter D_p.
    minor_diameter_um : float
        Diameter of the swept circle D_m.
    """

    principal_diameter_um: float = 24.0
    minor_diameter_um: float = 3.0

    def __post_init__(self):
        if not (self.principal_diameter_um > self.minor_diameter_um > 0):
            raise ValueError("toroid requires principal_diameter > minor_diameter > 0")

    @property
    def major_diameter_um(self) -> float:
        return self.principal_diameter_um - self.minor_diameter_um

    @property
    def major_radius_um(self) -> float:
        return 0.5 * self.major_diameter_um

    @property
    def minor_radius_um(self) -> float:
        return 0.5 * self.minor_diameter_um


def surface_distance(geometry: ToroidGeometry, rho, z):
    """Distance from (rho, z) to the torus surface; negative inside the dielectric."""
    u = np.asarray(rho, dtype=float) - geometry.major_radius_um
    return np.hypot(u, z) - geometry.minor_radius_um


def cross_section_angle(geometry: ToroidGeometry, rho, z):
    """Angle psi around the minor circle, zero on the outer equator.

    ``arctan2`` is used so that the inner side of the torus sits at psi = pi,
    where the outward-facing mode has no amplitude.
    """
    return np.arctan2(z, np.asarray(rho, dtype=float) - geometry.major_radius_um)


def angular_profile(psi, width, order=0):
    """Hermite-Gauss factor along psi, normalised to 1 at psi = 0.

    ``order`` must be even; order 0 gives exp(-(psi/width)^2).
    """
    if order % 2:
        raise ValueError("angular order must be even so that psi = 0 is an antinode")
    x = np.sqrt(2.0) * np.asarray(psi, dtype=float) / width
    gauss = np.exp(-0.5 * x * x)
    if order == 0:
        return gauss
    coef = np.zeros(order + 1)
    coef[order] = 1.0
    return npherm.hermval(x, coef) / npherm.hermval(0.0, coef) * gauss


def _angular_profile_derivative(psi, width, order=0):
    x = np.sqrt(2.0) * np.asarray(psi, dtype=float) / width
    gauss = np.exp(-0.5 * x * x)
    coef = np.zeros(order + 1)
    coef[order] = 1.0
    norm = npherm.hermval(0.0, coef)
    hn = npherm.hermval(x, coef)
    # H_n' = 2n H_{n-1}
    dcoef = npherm.hermder(coef) if order else np.zeros(1)
    dhn = npherm.hermval(x, dcoef)
    return (dhn - x * hn) * gauss / norm * np.sqrt(2.0) / width


@dataclass(frozen=True)
class ModeGrid:
    """Tabulated mode profile f(rho, z) on a rectilinear grid.

    ``values[i, j]`` is f at (rho_um[j], z_um[i]).
    """

    rho_um: np.ndarray
    z_um: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (len(self.z_um), len(self.rho_um)):
            raise ValueError("grid values must have shape (len(z), len(rho))")
        if np.any(np.diff(self.rho_um) <= 0) or np.any(np.diff(self.z_um) <= 0):
            raise ValueError("grid axes must be strictly increasing")

    def contains(self, rho, z):
        rho = np.asarray(rho)
        z = np.asarray(z)
        return ((rho >= self.rho_um[0]) & (rho <= self.rho_um[-1])
                & (z >= self.z_um[0]) & (z <= self.z_um[-1]))

    def interpolate(self, rho, z):
        """Bilinear interpolation; raises ModeDomainError outside the grid."""
        rho = np.asarray(rho, dtype=float)
        z = np.asarray(z, dtype=float)
        if not np.all(self.contains(rho, z)):
            raise ModeDomainError("position outside imported mode grid")
        j = np.clip(np.searchsorted(self.rho_um, rho, side="right") - 1, 0, len(self.rho_um) - 2)
        i = np.clip(np.searchsorted(self.z_um, z, side="right") - 1, 0, len(self.z_um) - 2)
        tr = (rho - self.rho_um[j]) / (self.rho_um[j + 1] - self.rho_um[j])
        tz = (z - self.z_um[i]) / (self.z_um[i + 1] - self.z_um[i])
        v = self.values
        return ((1 - tz) * ((1 - tr) * v[i, j] + tr * v[i, j + 1])
                + tz * ((1 - tr) * v[i + 1, j] + tr * v[i + 1, j + 1]))


def save_mode_grid(grid: ModeGrid, path) -> None:
    """Write a grid in the plain-text exchange format.

    Format::

        # free comment lines
        rho_um: r0 r1 ... r(N-1)
        z_um: z0 z1 ... z(M-1)
        <M rows of N whitespace-separated f values, row i at z_i>
    """
    with open(path, "w") as fh:
        fh.write("# wgmtransit mode grid v1\n")
        fh.write("rho_um: " + " ".join(repr(float(r)) for r in grid.rho_um) + "\n")
        fh.write("z_um: " + " ".join(repr(float(z)) for z in grid.z_um) + "\n")
        for row in np.asarray(grid.values):
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def load_mode_grid(path) -> ModeGrid:
    """Read a grid written by :func:`save_mode_grid` (or by hand)."""
    rho = z = None
    rows = []
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("rho_um:"):
            rho = np.array(line.split(":", 1)[1].split(), dtype=float)
        elif line.startswith("z_um:"):
            z = np.array(line.split(":", 1)[1].split(), dtype=float)
        else:
            rows.append(np.array(line.split(), dtype=float))
    if rho is None or z is None:
        raise ValueError(f"{path}: missing rho_um/z_um header")
    return ModeGrid(rho, z, np.vstack(rows))


@dataclass(frozen=True)
class ModeModel:
    """Scalar whispering-gallery mode with azimuthal number m.

    Parameters
    ----------
    geometry : ToroidGeometry
    azimuthal_number : int
    wavelength_nm : float
        Vacuum wavelength; sets the evanescent decay length lambda/2pi.
    mode_width_rad : float
        Angular width psi_0 of the Gaussian wrapped around the cross-section.
    angular_order : int
        Even Hermite order along psi (0 for the fundamental mode).
    grid : ModeGrid, optional
        If given, f is taken from the grid instead of the analytic form.
    g_max : float, optional
        Standing-wave peak coupling in rad/us (sqrt(2) times the
        traveling-wave peak). ``None`` means "compute from the mode volume".
    polarization_factor : float
        Dipole-averaging factor applied to the circular-polarization coupling.
    interior_width_um : float, optional
        Gaussian depth of the field inside the dielectric, used only for the
        mode-volume integral. Defaults to lambda/(2 n).
    """

    geometry: ToroidGeometry = field(default_factory=ToroidGeometry)
    azimuthal_number: int = 118
    wavelength_nm: float = const.CS_D2_WAVELENGTH_NM
    mode_width_rad: float = 0.35
    angular_order: int = 0
    grid: ModeGrid | None = None
    g_max: float | None = None
    polarization_factor: float = 0.6
    refractive_index: float = 1.4525
    interior_width_um: float | None = None

    def __post_init__(self):
        if self.mode_width_rad <= 0:
            raise ValueError("mode_width_rad must be positive")
        if self.angular_order % 2:
            raise ValueError("angular_order must be even")

    @property
    def source(self) -> str:
        return "grid" if self.grid is not None else "analytic"

    @property
    def reduced_wavelength_um(self) -> float:
        return const.reduced_wavelength_um(self.wavelength_nm)

    @property
    def g_tw_max(self) -> float:
        if self.g_max is None:
            raise ValueError("mode coupling not resolved; call with_coupling() first")
        return self.g_max / np.sqrt(2.0)

    def with_coupling(self, gamma=None, omega_a0=None, dielectric_constant=None) -> "ModeModel":
        """Return a copy with ``g_max`` filled in (no-op if already set)."""
        if self.g_max is not None:
            return self
        gamma = const.mhz_to_rad_us(const.CS_D2_GAMMA_MHZ) if gamma is None else gamma
        omega_a0 = (const.wavelength_nm_to_rad_s(self.wavelength_nm) * const.US
                    if omega_a0 is None else omega_a0)
        eps = self.refractive_index**2 if dielectric_constant is None else dielectric_constant
        _, g_max = coupling_max(self, gamma, omega_a0, mode_volume(self, eps))
        return replace(self, g_max=g_max)


def _analytic_profile(mode: ModeModel, rho, z):
    g = mode.geometry
    d = surface_distance(g, rho, z)
    psi = cross_section_angle(g, rho, z)
    f = np.exp(-d / mode.reduced_wavelength_um) * angular_profile(psi, mode.mode_width_rad, mode.angular_order)
    return np.where(d >= 0, f, 0.0)


def mode_function(mode: ModeModel, rho, z):
    """Mode profile f at (rho, z); zero inside the dielectric for the analytic mode."""
    if mode.grid is not None:
        return mode.grid.interpolate(rho, z)
    return _analytic_profile(mode, rho, z)


def mode_gradient(mode: ModeModel, rho, z, step_um: float = 1e-3):
    """Return (f, df/drho, df/dz).

    Analytic chain rule for the analytic mode; central differences with a
    1 nm step for imported grids.
    """
    rho = np.asarray(rho, dtype=float)
    z = np.asarray(z, dtype=float)
    if mode.grid is not None:
        f = mode.grid.interpolate(rho, z)
        h = step_um
        dfr = (mode.grid.interpolate(rho + h, z) - mode.grid.interpolate(rho - h, z)) / (2 * h)
        dfz = (mode.grid.interpolate(rho, z + h) - mode.grid.interpolate(rho, z - h)) / (2 * h)
        return f, dfr, dfz
    g = mode.geometry
    u = rho - g.major_radius_um
    rc = np.hypot(u, z)
    d = rc - g.minor_radius_um
    psi = np.arctan2(z, u)
    lam = mode.reduced_wavelength_um
    radial = np.exp(-d / lam)
    ang = angular_profile(psi, mode.mode_width_rad, mode.angular_order)
    dang = _angular_profile_derivative(psi, mode.mode_width_rad, mode.angular_order)
    outside = d >= 0
    f = np.where(outside, radial * ang, 0.0)
    # d(d)/drho = u/rc, d(psi)/drho = -z/rc^2
    dfr = radial * (-ang / lam * u / rc - dang * z / rc**2)
    dfz = radial * (-ang / lam * z / rc + dang * u / rc**2)
    return f, np.where(outside, dfr, 0.0), np.where(outside, dfz, 0.0)


def _interior_profile(mode: ModeModel, rc, psi):
    width = (mode.interior_width_um if mode.interior_width_um is not None
             else mode.wavelength_nm * 1e-3 / (2.0 * mode.refractive_index))
    depth = mode.geometry.minor_radius_um - rc
    return np.exp(-(depth / width) ** 2) * angular_profile(psi, mode.mode_width_rad, mode.angular_order)


def mode_volume(mode: ModeModel, dielectric_constant: float, rtol: float = 1e-4,
                extent_lengths: float = 20.0) -> float:
    """V_m = 2 pi int dA eps(rho,z) rho f^2 in um^3.

    The integral is done in polar coordinates (r, psi) centred on the minor
    circle. Outside the dielectric f is the mode profile; inside, the analytic
    mode is continued with a Gaussian decay of depth ``interior_width_um``
    (imported grids are used as given).
    """
    g = mode.geometry
    rm = g.minor_radius_um
    lam = mode.reduced_wavelength_um
    r_out = rm + extent_lengths * lam

    def integrand(r, psi, inside):
        rho = g.major_radius_um + r * np.cos(psi)
        z = r * np.sin(psi)
        if mode.grid is not None:
            if not mode.grid.contains(rho, z):
                return 0.0
            f = float(mode.grid.interpolate(rho, z))
        elif inside:
            f = float(_interior_profile(mode, r, psi))
        else:
            f = float(_analytic_profile(mode, rho, z))
        eps = dielectric_constant if inside else 1.0
        return eps * rho * f * f * r

    psi_lim = min(np.pi, 12.0 * mode.mode_width_rad * (1 + mode.angular_order))
    total = 0.0
    err = 0.0
    for inside, (r0, r1) in ((True, (0.0, rm)), (False, (rm, r_out))):
        val, e = integrate.nquad(
            lambda r, psi: integrand(r, psi, inside),
            [(r0, r1), (-psi_lim, psi_lim)],
            opts=[{"epsrel": rtol * 0.1, "limit": 200},
                  {"epsrel": rtol * 0.1, "limit": 200, "points": [0.0]}],
        )
        total += val
        err += e
    vol = 2.0 * np.pi * total
    if total > 0 and err / total > rtol:
        raise QuadratureError(f"mode volume quadrature error {err / total:.2e} > {rtol:.1e}")
    return vol


def region_mode_volume(profile, dielectric, rho_range, z_range, rtol: float = 1e-4) -> float:
    """Mode volume of an arbitrary profile over a rectangle of the rho-z half plane.

    ``profile(rho, z)`` and ``dielectric(rho, z)`` are scalar callables.
    """
    val, err = integrate.nquad(
        lambda z, rho: dielectric(rho, z) * rho * profile(rho, z) ** 2,
        [z_range, rho_range], opts={"epsrel": rtol * 0.1, "limit": 200},
    )
    if val != 0 and abs(err / val) > rtol:
        raise QuadratureError(f"mode volume quadrature error {abs(err / val):.2e}")
    return 2.0 * np.pi * val


def coupling_max(mode: ModeModel, gamma: float, omega_a0: float, volume_um3: float):
    """Peak couplings from the mode volume.

    Parameters
    ----------
    gamma : float
        Atomic field decay rate in rad/us.
    omega_a0 : float
        Atomic transition angular frequency in rad/us.
    volume_um3 : float
        Mode volume.

    Returns
    -------
    (g_tw_max, g_max) in rad/us, with g_max = sqrt(2) g_tw_max.
    """
    if volume_um3 <= 0:
        raise ValueError("mode volume must be positive")
    c = const.C_UM_US
    g_tw = mode.polarization_factor * np.sqrt(3.0 * np.pi * c**3 * gamma / (omega_a0**2 * volume_um3))
    return g_tw, np.sqrt(2.0) * g_tw


def coupling_at(mode: ModeModel, rho, phi, z):
    """Traveling-wave coupling g_tw = g_tw_max f exp(i m phi) (rad/us)."""
    f = mode_function(mode, rho, z)
    return mode.g_tw_max * f * np.exp(1j * mode.azimuthal_number * np.asarray(phi))


def standing_wave_couplings(mode: ModeModel, rho, phi, z):
    """(g_A, g_B) = g_max f (cos theta, sin theta) with theta = m phi."""
    f = mode_function(mode, rho, z)
    theta = mode.azimuthal_number * np.asarray(phi)
    return mode.g_max * f * np.cos(theta), mode.g_max * f * np.sin(theta)
