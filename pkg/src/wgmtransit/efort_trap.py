"""Two-color evanescent far-off-resonant trap switched on at atom detection.

A red-detuned mode (attractive, dominated by the D1 line) and a blue-detuned
mode (repulsive, dominated by D2) decay away from the surface with slightly
different lengths. Their sum forms a potential minimum a fraction of a
wavelength from the surface. Each mode's light shift is the scalar
ground-state polarizability at the trap frequency times the local intensity,
U = -Re alpha I / (2 eps0 c). The peak intensity per unit input power depends
on mode volumes and cavity build-up, which are not modelled. Instead it is
calibrated so that U_t + U_s along z = 0 has its minimum at a target
distance and depth, and the calibration is returned for the run metadata.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import constants as const
from . import detection_ensemble as de
from . import forces_dynamics as fd
from . import kernels as K
from . import surface_response as sr
from .casimir_polder import SurfaceModel
from .geometry_modes import ModeModel, ToroidGeometry, mode_gradient

log = logging.getLogger(__name__)

REFERENCE_WIDTH_RAD = 0.35


class TrapCalibrationError(RuntimeError):
    """The requested depth and distance cannot be met with red attraction and blue repulsion."""


@dataclass(frozen=True)
class TrapConfig:
    """Trap modes, powers and capture criterion.

    Mode widths along psi scale as sqrt(wavelength) from the probe-mode
    reference width; ``red_width_scale`` widens the red envelope beyond that.
    The red mode is a second-order Hermite-Gauss mode so that its nodes leave
    a blue barrier on either side of the equator.
    """

    red_wavelength_nm: float = 898.0
    red_azimuthal_number: int = 106
    red_angular_order: int = 2
    blue_wavelength_nm: float = 848.0
    blue_azimuthal_number: int = 112
    blue_angular_order: int = 0
    red_power_uw: float = 50.0
    blue_power_uw: float = 50.0
    reference_width_rad: float = REFERENCE_WIDTH_RAD
    red_width_scale: float = 1.0
    reference_wavelength_nm: float = const.CS_D2_WAVELENGTH_NM
    target_distance_nm: float = 150.0
    target_depth_mk: float = 1.5
    trigger_delay_us: float = 0.0
    post_trigger_us: float = 50.0
    capture_threshold_mhz: float = 5.0
    capture_time_us: float = 10.0
    orbit_stride: int = 100

    def __post_init__(self):
        if self.red_power_uw < 0 or self.blue_power_uw < 0:
            raise ValueError("trap powers must be non-negative")
        if self.capture_time_us > self.post_trigger_us:
            raise ValueError("capture time must lie inside the post-trigger window")
        if self.target_distance_nm <= 0 or self.target_depth_mk <= 0:
            raise ValueError("calibration targets must be positive")

    def width(self, wavelength_nm: float) -> float:
        return self.reference_width_rad * np.sqrt(wavelength_nm / self.reference_wavelength_nm)

    def modes(self, geometry: ToroidGeometry) -> tuple[ModeModel, ModeModel]:
        red = ModeModel(geometry, self.red_azimuthal_number, self.red_wavelength_nm,
                        self.width(self.red_wavelength_nm) * self.red_width_scale,
                        self.red_angular_order, g_max=0.0)
        blue = ModeModel(geometry, self.blue_azimuthal_number, self.blue_wavelength_nm,
                         self.width(self.blue_wavelength_nm), self.blue_angular_order, g_max=0.0)
        return red, blue


@dataclass(frozen=True)
class TrapCalibration:
    """Light-shift coefficients and the intensities they imply.

    ``*_coef`` multiply the squared mode function (rad/us). ``*_shift_per_intensity``
    is -Re alpha/(2 eps0 c hbar) in rad/us per W/m^2, and
    ``*_intensity_per_uw`` is the calibrated peak surface intensity per uW of
    input power.
    """

    red_coef: float
    blue_coef: float
    red_shift_per_intensity: float
    blue_shift_per_intensity: float
    red_intensity_per_uw: float
    blue_intensity_per_uw: float
    minimum_distance_nm: float
    depth_mk: float

    def coefficients(self, config: TrapConfig) -> tuple[float, float]:
        """Coefficients at the powers in ``config`` (linear in power)."""
        red = self.red_shift_per_intensity * self.red_intensity_per_uw * config.red_power_uw
        blue = self.blue_shift_per_intensity * self.blue_intensity_per_uw * config.blue_power_uw
        return red, blue

    def to_dict(self) -> dict:
        return asdict(self)


def light_shift_per_intensity(atom: sr.AtomResponse, wavelength_nm: float) -> float:
    """Ground-state scalar light shift per unit intensity, rad/us per W/m^2."""
    omega = const.wavelength_nm_to_rad_s(wavelength_nm)
    alpha_m3 = float(sr.polarizability_real_axis(atom.ground, omega))
    # alpha in SI is 4 pi eps0 alpha_m3; U = -alpha_SI I / (2 eps0 c)
    return -4.0 * np.pi * alpha_m3 / (2.0 * const.C_LIGHT * const.HBAR) * const.US


def _equator_profiles(red: ModeModel, blue: ModeModel, d_um):
    rho = red.geometry.major_radius_um + red.geometry.minor_radius_um + np.asarray(d_um, float)
    z = np.zeros_like(rho)
    fr, frr, _ = mode_gradient(red, rho, z)
    fb, fbr, _ = mode_gradient(blue, rho, z)
    return fr * fr, 2.0 * fr * frr, fb * fb, 2.0 * fb * fbr


def _surface_terms(surface: SurfaceModel | None, d_um):
    d_um = np.asarray(d_um, float)
    if surface is None:
        return np.zeros_like(d_um), np.zeros_like(d_um)
    return surface.ground(d_um), surface.ground.derivative(d_um)


def calibrate_trap(config: TrapConfig, geometry: ToroidGeometry, surface: SurfaceModel | None = None,
                   atom: sr.AtomResponse | None = None) -> TrapCalibration:
    """Solve for the two light-shift amplitudes giving the target minimum of U_t + U_s.

    The conditions U(d0) = -depth and U'(d0) = 0 are linear in the two
    coefficients. The red coefficient must come out negative and the blue
    positive, otherwise TrapCalibrationError is raised.
    """
    atom = atom or sr.build_atom_response()
    red, blue = config.modes(geometry)
    d0 = config.target_distance_nm * 1e-3
    depth = config.target_depth_mk * const.MK_RAD_US
    fr2, dfr2, fb2, dfb2 = (float(v) for v in _equator_profiles(red, blue, d0))
    us, dus = (float(v) for v in _surface_terms(surface, d0))
    mat = np.array([[fr2, fb2], [dfr2, dfb2]])
    red_coef, blue_coef = np.linalg.solve(mat, [-depth - us, -dus])
    if not (red_coef < 0 < blue_coef):
        raise TrapCalibrationError(
            f"calibration gives red {red_coef:.3g}, blue {blue_coef:.3g} rad/us; "
            "need red attraction and blue repulsion")
    k_red = light_shift_per_intensity(atom, config.red_wavelength_nm)
    k_blue = light_shift_per_intensity(atom, config.blue_wavelength_nm)
    if not (k_red < 0 < k_blue):
        raise TrapCalibrationError("trap wavelengths do not give red attraction and blue repulsion")
    if config.red_power_uw <= 0 or config.blue_power_uw <= 0:
        raise TrapCalibrationError("calibration needs positive powers in both modes")
    return TrapCalibration(
        float(red_coef), float(blue_coef), k_red, k_blue,
        float(red_coef / k_red / config.red_power_uw),
        float(blue_coef / k_blue / config.blue_power_uw),
        config.target_distance_nm, config.target_depth_mk)


@dataclass(frozen=True)
class TrapPotential:
    """Potentials (rad/us) on a set of points."""

    red: np.ndarray
    blue: np.ndarray
    surface: np.ndarray

    @property
    def trap(self) -> np.ndarray:
        return self.red + self.blue

    @property
    def total(self) -> np.ndarray:
        return self.red + self.blue + self.surface


def trap_potential(config: TrapConfig, calibration: TrapCalibration, geometry: ToroidGeometry,
                   rho, z, surface: SurfaceModel | None = None) -> TrapPotential:
    """U_red, U_blue and the ground-state surface potential at (rho, z)."""
    red, blue = config.modes(geometry)
    rho = np.asarray(rho, float)
    z = np.asarray(z, float)
    c_red, c_blue = calibration.coefficients(config)
    fr, _, _ = mode_gradient(red, rho, z)
    fb, _, _ = mode_gradient(blue, rho, z)
    d = np.hypot(rho - geometry.major_radius_um, z) - geometry.minor_radius_um
    us = np.zeros_like(d)
    if surface is not None:
        outside = d > 0
        us[outside] = surface.ground(np.clip(d[outside], surface.ground.table.d_min, None))
    return TrapPotential(c_red * fr * fr, c_blue * fb * fb, us)


def equator_scan(config: TrapConfig, calibration: TrapCalibration, geometry: ToroidGeometry,
                 d_um, surface: SurfaceModel | None = None) -> TrapPotential:
    rho = geometry.major_radius_um + geometry.minor_radius_um + np.asarray(d_um, float)
    return trap_potential(config, calibration, geometry, rho, np.zeros_like(rho), surface)


@dataclass(frozen=True)
class TrapMinimum:
    distance_nm: float
    depth_mk: float
    slope_sign_changes: int


def find_minimum(config: TrapConfig, calibration: TrapCalibration, geometry: ToroidGeometry,
                 surface: SurfaceModel | None = None, d_range_um=(0.02, 1.0),
                 points: int = 20001) -> TrapMinimum:
    """Locate the minimum of U_t + U_s along z = 0 on a fine grid.

    ``slope_sign_changes`` counts sign changes of dU_t/dd alone on the grid.
    """
    d = np.linspace(*d_range_um, points)
    pot = equator_scan(config, calibration, geometry, d, surface)
    total = pot.total
    interior = np.flatnonzero((total[1:-1] < total[:-2]) & (total[1:-1] <= total[2:])) + 1
    if interior.size == 0:
        return TrapMinimum(float("nan"), 0.0, 0)
    i = interior[np.argmin(total[interior])]
    slope = np.diff(pot.trap)
    changes = int(np.count_nonzero(np.diff(np.sign(slope[slope != 0])) != 0))
    return TrapMinimum(float(d[i] * 1e3), float(-total[i] / const.MK_RAD_US), changes)


def trap_fields(config: TrapConfig, calibration: TrapCalibration, geometry: ToroidGeometry,
                t_on: float) -> fd.TrapFields:
    red, blue = config.modes(geometry)
    c_red, c_blue = calibration.coefficients(config)
    return fd.TrapFields(red, blue, c_red, c_blue, float(t_on))


# ---------------------------------------------------------------------------
# capture study


@dataclass(frozen=True)
class TrapOutcome:
    """Post-trigger summary of one trajectory."""

    index: int
    captured: bool
    crashed: bool
    coupled_time_us: float
    g_at_check_mhz: float
    orbit: np.ndarray = field(repr=False)


def trap_setup(ctx: de.PipelineContext, config: TrapConfig, calibration: TrapCalibration | None,
               record: de.TriggerRecord, probe_on: bool = True) -> fd.TransitSetup:
    """Detection setup with the trap switched on at the trigger (optionally probe off)."""
    base = de.detection_setup(ctx.setup, ctx.trigger)
    t_trig = record.trigger_time
    if calibration is None:
        setup = replace(base, trap=None, toggles=replace(base.toggles, trap=False))
    else:
        fields = trap_fields(config, calibration, base.geometry, t_trig + config.trigger_delay_us)
        setup = replace(base, trap=fields, toggles=replace(base.toggles, trap=True))
    if not probe_on:
        setup = replace(setup, probe_after_switch=fd.ProbeSettings(base.probe.offset, 0.0),
                        t_switch=t_trig)
    return setup


def run_trapped(ctx: de.PipelineContext, config: TrapConfig, calibration: TrapCalibration | None,
                record: de.TriggerRecord, probe_on: bool = True) -> TrapOutcome:
    """Replay a triggered trajectory with the trap on and classify it.

    Before the trigger the trap is off, so the replay matches the detection
    run exactly up to that point.
    """
    setup = trap_setup(ctx, config, calibration, record, probe_on)
    t_end = record.trigger_time + config.post_trigger_us
    n = int(np.ceil((t_end - ctx.t_start) / setup.dt)) + 1
    out = de.replay(ctx, record, setup, n)
    traj = out["trajectory"]
    rel = traj.time - record.trigger_time
    g_mhz = traj.coupling / const.TWO_PI
    check = int(np.argmin(np.abs(rel - config.capture_time_us)))
    after = rel >= 0
    coupled = np.flatnonzero(after & (g_mhz > config.capture_threshold_mhz))
    coupled_time = float(rel[coupled[-1]]) if coupled.size else 0.0
    post = traj.record[after][:: config.orbit_stride]
    orbit = post[:, [K.REC_T, K.REC_X, K.REC_Y, K.REC_Z]].copy()
    orbit[:, 0] -= record.trigger_time
    return TrapOutcome(record.index, bool(g_mhz[check] > config.capture_threshold_mhz),
                       traj.status is fd.Status.CRASHED, coupled_time, float(g_mhz[check]), orbit)


@dataclass
class TrapStudyResult:
    outcomes: list
    calibration: TrapCalibration | None
    probe_on: bool

    @property
    def capture_fraction(self) -> float:
        return float(np.mean([o.captured for o in self.outcomes])) if self.outcomes else float("nan")

    @property
    def capture_stderr(self) -> float:
        p, n = self.capture_fraction, len(self.outcomes)
        return float(np.sqrt(p * (1.0 - p) / n)) if n else float("nan")

    @property
    def crash_fraction(self) -> float:
        return float(np.mean([o.crashed for o in self.outcomes])) if self.outcomes else float("nan")

    def coupled_times(self, captured_only: bool = True) -> np.ndarray:
        return np.array([o.coupled_time_us for o in self.outcomes if o.captured or not captured_only])

    def summary(self) -> dict:
        times = self.coupled_times()
        return {
            "n": len(self.outcomes),
            "probe_on": self.probe_on,
            "capture_fraction": self.capture_fraction,
            "capture_stderr": self.capture_stderr,
            "crash_fraction": self.crash_fraction,
            "mean_coupled_time_us": float(times.mean()) if times.size else 0.0,
            "calibration": self.calibration.to_dict() if self.calibration else None,
        }


_TRAP_CTX = None


def _trap_init(payload):
    global _TRAP_CTX
    _TRAP_CTX = payload


def _trap_worker(records):
    ctx, config, cal, probe_on = _TRAP_CTX
    return [run_trapped(ctx, config, cal, r, probe_on) for r in records]


def run_trap_study(config: TrapConfig, ctx: de.PipelineContext, records=None,
                   calibration: TrapCalibration | None = None, trap_on: bool = True,
                   probe_on: bool = True, workers: int = 1) -> TrapStudyResult:
    """Capture statistics for triggered atoms with the trap switched on at detection.

    ``records`` defaults to a fresh trigger pipeline run with the trap off.
    With ``trap_on=False`` the same trajectories are continued without the
    trap, which gives the fall-through baseline.
    """
    if records is None:
        records = de.run_trigger_pipeline(ctx, workers).records
    cal = None
    if trap_on:
        cal = calibration or calibrate_trap(config, ctx.setup.geometry, ctx.setup.surface)
    records = list(records)
    if workers > 1 and len(records) > 1:
        parts = [records[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(workers, initializer=_trap_init,
                                 initargs=((ctx, config, cal, probe_on),)) as pool:
            merged = [o for chunk in pool.map(_trap_worker, parts) for o in chunk]
        order = {r.index: i for i, r in enumerate(records)}
        outcomes = sorted(merged, key=lambda o: order[o.index])
    else:
        outcomes = [run_trapped(ctx, config, cal, r, probe_on) for r in records]
    return TrapStudyResult(outcomes, cal, probe_on)
