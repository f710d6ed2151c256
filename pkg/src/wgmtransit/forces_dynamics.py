"""Forces on a moving atom and stochastic trajectory integration.

Forces are reported per unit mass (um/us^2) and momentum diffusion as the
velocity-variance rate 2 D_ii / m^2 (um^2/us^3), so that the Euler-Maruyama
update reads v += F dt + sqrt(2 D dt / m^2) W. Positions are integrated in
Cartesian coordinates; the physics per step lives in ``kernels``.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from . import constants as const
from . import kernels as K
from .casimir_polder import SurfaceModel
from .geometry_modes import ModeModel, ToroidGeometry, surface_distance

log = logging.getLogger(__name__)


class Status(str, enum.Enum):
    FALLING = "falling"
    CRASHED = "crashed"
    ESCAPED = "escaped"


class IntegrationError(RuntimeError):
    """Step-size instability detected by the conservative-mode energy check."""


@dataclass(frozen=True)
class ForceToggles:
    dipole: bool = True
    surface: bool = True
    shifts: bool = True
    trap: bool = True
    velocity_correction: bool = True
    diffusion: bool = True

    def as_array(self) -> np.ndarray:
        return np.array([self.dipole, self.surface, self.shifts, self.trap,
                         self.velocity_correction, self.diffusion], dtype=np.int64)

    @classmethod
    def none(cls) -> "ForceToggles":
        return cls(False, False, False, False, False, False)


@dataclass(frozen=True)
class CavitySettings:
    """Cavity and atom rates in rad/us; detuning delta_ca = omega_c - omega_a0."""

    kappa_i: float
    kappa_ex: float
    h: float
    gamma: float = const.mhz_to_rad_us(const.CS_D2_GAMMA_MHZ)
    delta_ca: float = 0.0

    @classmethod
    def from_mhz(cls, kappa_i, kappa_ex, h, gamma=const.CS_D2_GAMMA_MHZ, delta_ca=0.0):
        m = const.mhz_to_rad_us
        return cls(m(kappa_i), m(kappa_ex), m(h), m(gamma), m(delta_ca))


@dataclass(frozen=True)
class ProbeSettings:
    """Probe offset omega_p - omega_c (rad/us, nominal cavity) and input flux (counts/us)."""

    offset: float = 0.0
    input_flux: float = 15.0


@dataclass(frozen=True)
class TrapFields:
    """Two-color trap: U_t/hbar = red_coef f_red^2 + blue_coef f_blue^2 (rad/us)."""

    red: ModeModel
    blue: ModeModel
    red_coef: float
    blue_coef: float
    t_on: float = 0.0


@dataclass(frozen=True)
class TransitSetup:
    """Everything a trajectory needs besides its initial state and noise."""

    mode: ModeModel
    cavity: CavitySettings
    probe: ProbeSettings = field(default_factory=ProbeSettings)
    probe_after_switch: ProbeSettings | None = None
    t_switch: float = np.inf
    surface: SurfaceModel | None = None
    trap: TrapFields | None = None
    toggles: ForceToggles = field(default_factory=ForceToggles)
    dt: float = 1e-3

    @property
    def geometry(self) -> ToroidGeometry:
        return self.mode.geometry


@dataclass(frozen=True)
class AtomKinematics:
    """Atom state; position cylindrical (rho, phi, z) in um, velocity Cartesian um/us."""

    rho: float
    phi: float
    z: float
    velocity: np.ndarray
    t: float = 0.0
    status: Status = Status.FALLING

    @property
    def cartesian(self) -> np.ndarray:
        return np.array([self.rho * np.cos(self.phi), self.rho * np.sin(self.phi), self.z])

    @classmethod
    def from_cartesian(cls, position, velocity, t=0.0, status=Status.FALLING):
        x, y, z = (float(v) for v in position)
        return cls(float(np.hypot(x, y)), float(np.arctan2(y, x)), z,
                   np.asarray(velocity, float), float(t), Status(status))


@dataclass(frozen=True)
class ForceBreakdown:
    """Force components per unit mass (um/us^2) and velocity-diffusion rates."""

    dipole: np.ndarray
    surface: np.ndarray
    gravity: np.ndarray
    trap: np.ndarray
    velocity_correction: np.ndarray
    diffusion_diag: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.dipole + self.surface + self.gravity + self.trap + self.velocity_correction


# ---------------------------------------------------------------------------
# parameter packing


def _mode_grid(mode: ModeModel | None):
    if mode is None or mode.grid is None:
        return K.EMPTY_GRID
    g = mode.grid
    return (np.asarray(g.rho_um, float), np.asarray(g.z_um, float), np.asarray(g.values, float))


def surface_tables(surface: SurfaceModel | None, points: int = 200):
    """(x0, dx, tables[6, N]) for the kernels; zeros if no surface model."""
    if surface is None:
        return float(np.log(1e-3)), float(np.log(2e4) / (points - 1)), \
            np.vstack([np.zeros(points)] * 4 + [np.ones(points), np.zeros(points)])
    iso = surface.isotropic
    tg, te = surface.ground.table, surface.excited.table
    tables = np.vstack([tg.values, tg.slopes, te.values, te.slopes, iso.values, iso.slopes])
    return tg.x0, tg.dx, tables


def pack_params(setup: TransitSetup, kappa_ex: float | None = None, cavity_shift: float = 0.0):
    """Kernel parameter vector for one trajectory.

    ``kappa_ex`` and ``cavity_shift`` (omega_c jitter, rad/us) override the
    nominal cavity for this trajectory.
    """
    cav = setup.cavity
    mode = setup.mode
    kex = cav.kappa_ex if kappa_ex is None else float(kappa_ex)
    if kex <= 0:
        raise ValueError("kappa_ex must be positive")
    pre = setup.probe
    post = setup.probe_after_switch or pre
    x0, dx, _ = surface_tables(setup.surface)
    p = np.zeros(K.NP)
    geo = mode.geometry
    p[K.P_R_MAJOR] = geo.major_radius_um
    p[K.P_R_MINOR] = geo.minor_radius_um
    p[K.P_M_AZ] = mode.azimuthal_number
    p[K.P_G_TW_MAX] = mode.g_tw_max
    p[K.P_K_WAVE] = const.TWO_PI / (mode.wavelength_nm * 1e-3)
    p[K.P_HBAR_M] = const.HBAR_OVER_M
    p[K.P_G_ACC] = const.G_EARTH_UM_US2
    p[K.P_KAPPA_I] = cav.kappa_i
    p[K.P_KAPPA_EX] = kex
    p[K.P_H] = cav.h
    p[K.P_GAMMA0] = cav.gamma
    for probe, (i_cp, i_ap, i_drive, i_pin) in (
            (pre, (K.P_DELTA_CP, K.P_DELTA_AP0, K.P_DRIVE, K.P_P_IN)),
            (post, (K.P_DELTA_CP_POST, K.P_DELTA_AP0_POST, K.P_DRIVE_POST, K.P_P_IN_POST))):
        p[i_cp] = cavity_shift - probe.offset
        p[i_ap] = -cav.delta_ca - probe.offset
        p[i_drive] = np.sqrt(2.0 * kex * probe.input_flux)
        p[i_pin] = probe.input_flux
    p[K.P_T_SWITCH] = setup.t_switch
    p[K.P_TAB_X0] = x0
    p[K.P_TAB_DX] = dx
    p[K.P_PROBE_LAM] = mode.reduced_wavelength_um
    p[K.P_PROBE_WIDTH] = mode.mode_width_rad
    p[K.P_PROBE_ORDER] = mode.angular_order
    trap = setup.trap
    if trap is not None:
        p[K.P_T_TRAP_ON] = trap.t_on
        for m_, coef, (i_lam, i_w, i_o, i_c) in (
                (trap.red, trap.red_coef, (K.P_RED_LAM, K.P_RED_WIDTH, K.P_RED_ORDER, K.P_RED_COEF)),
                (trap.blue, trap.blue_coef, (K.P_BLUE_LAM, K.P_BLUE_WIDTH, K.P_BLUE_ORDER, K.P_BLUE_COEF))):
            p[i_lam] = m_.reduced_wavelength_um
            p[i_w] = m_.mode_width_rad
            p[i_o] = m_.angular_order
            p[i_c] = coef
    else:
        p[K.P_T_TRAP_ON] = np.inf
        p[K.P_RED_LAM] = p[K.P_BLUE_LAM] = 1.0
        p[K.P_RED_WIDTH] = p[K.P_BLUE_WIDTH] = 1.0
    return p


def _toggles(setup: TransitSetup, override: ForceToggles | None = None) -> np.ndarray:
    tog = (override or setup.toggles).as_array()
    if setup.trap is None:
        tog[K.TG_TRAP] = 0
    return tog


def _grids(setup: TransitSetup):
    trap = setup.trap
    return (_mode_grid(setup.mode), _mode_grid(trap.red if trap else None),
            _mode_grid(trap.blue if trap else None))


def _evaluate(setup, position, velocity, t, toggles, params=None):
    ns = K.get_backend("numpy")
    p = pack_params(setup) if params is None else params
    _, _, tables = surface_tables(setup.surface)
    x, y, z = (np.float64(v) for v in position)
    vx, vy, vz = (np.float64(v) for v in velocity)
    g0, g1, g2 = _grids(setup)
    out = ns.evaluate(x, y, z, vx, vy, vz, float(t), False, p, toggles, tables, g0, g1, g2)
    return tuple(np.asarray(o, float)[()] for o in out)


def _acc(out, with_gravity=False):
    a = np.array(out[:3], float)
    if not with_gravity:
        a[2] += const.G_EARTH_UM_US2
    return a


# ---------------------------------------------------------------------------
# public force functions


def dipole_force(setup: TransitSetup, position, t: float = 0.0) -> np.ndarray:
    """Semiclassical dipole force per unit mass at a Cartesian position (um/us^2)."""
    tog = ForceToggles(dipole=True, surface=False, shifts=setup.toggles.shifts, trap=False,
                       velocity_correction=False, diffusion=False).as_array()
    return _acc(_evaluate(setup, position, (0, 0, 0), t, tog))


def velocity_correction(setup: TransitSetup, position, velocity, t: float = 0.0) -> np.ndarray:
    """First-order-in-velocity correction to the dipole force (um/us^2)."""
    base = ForceToggles(dipole=True, surface=False, shifts=setup.toggles.shifts, trap=False,
                        velocity_correction=False, diffusion=False)
    f0 = _acc(_evaluate(setup, position, velocity, t, base.as_array()))
    f1 = _acc(_evaluate(setup, position, velocity, t,
                        replace(base, velocity_correction=True).as_array()))
    return f1 - f0


def diffusion_tensor(setup: TransitSetup, position, t: float = 0.0) -> np.ndarray:
    """Diagonal velocity-diffusion rates 2 D_ii / m^2 (um^2/us^3)."""
    tog = ForceToggles(dipole=False, surface=False, shifts=setup.toggles.shifts, trap=False,
                       velocity_correction=False, diffusion=True).as_array()
    out = _evaluate(setup, position, (0, 0, 0), t, tog)
    return np.array(out[3:6], float)


def total_force(setup: TransitSetup, position, velocity, t: float = 0.0,
                toggles: ForceToggles | None = None) -> ForceBreakdown:
    """Component-wise forces respecting the toggles; gravity is always on."""
    tg = toggles or setup.toggles
    zero = np.zeros(3)

    def single(**on):
        flags = dict(dipole=False, surface=False, shifts=tg.shifts, trap=False,
                     velocity_correction=False, diffusion=False)
        flags.update(on)
        return _acc(_evaluate(setup, position, velocity, t, _toggles(setup, ForceToggles(**flags))))

    dip = single(dipole=True) if tg.dipole else zero
    surf = single(surface=True) if tg.surface else zero
    trap = single(trap=True) if (tg.trap and setup.trap is not None) else zero
    vc = (single(dipole=True, velocity_correction=True) - dip
          if (tg.velocity_correction and tg.dipole) else zero)
    diff = diffusion_tensor(setup, position, t) if tg.diffusion else zero
    grav = np.array([0.0, 0.0, -const.G_EARTH_UM_US2])
    return ForceBreakdown(dip, surf, grav, trap, vc, diff)


def langevin_step(kin: AtomKinematics, forces: ForceBreakdown, dt: float, rng,
                  geometry: ToroidGeometry | None = None) -> AtomKinematics:
    """One Euler-Maruyama step: velocity first, then position with the new velocity."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if kin.status == Status.CRASHED:
        return replace(kin, t=kin.t + dt)
    w = rng.standard_normal(3)
    v = kin.velocity + forces.total * dt + np.sqrt(np.asarray(forces.diffusion_diag) * dt) * w
    r = kin.cartesian + v * dt
    status = kin.status
    if geometry is not None:
        rho = np.hypot(r[0], r[1])
        if surface_distance(geometry, rho, r[2]) < 0:
            ns = K.get_backend("numpy")
            r = np.array(ns.project_to_surface(r[0], r[1], r[2], geometry.major_radius_um,
                                               geometry.minor_radius_um), float)
            v = np.zeros(3)
            status = Status.CRASHED
    return AtomKinematics.from_cartesian(r, v, kin.t + dt, status)


# ---------------------------------------------------------------------------
# trajectories


@dataclass
class Trajectory:
    """Per-step record (columns ``kernels.RECORD_COLUMNS``) plus final state."""

    record: np.ndarray
    final_state: np.ndarray
    status: Status
    crash_step: int = -1

    def column(self, name: str) -> np.ndarray:
        return self.record[:, K.RECORD_COLUMNS.index(name)]

    @property
    def time(self) -> np.ndarray:
        return self.record[:, K.REC_T]

    @property
    def transmission(self) -> np.ndarray:
        return self.record[:, K.REC_TRANS]

    @property
    def reflection(self) -> np.ndarray:
        return self.record[:, K.REC_REFL]

    @property
    def coupling(self) -> np.ndarray:
        """Standing-wave coupling g = sqrt(2)|g_tw| in rad/us."""
        return self.record[:, K.REC_G]


ESCAPE_MARGIN_UM = 0.5


def classify(final_state, initial_state, t_total: float, crashed: bool) -> Status:
    """Crashed, Escaped (pushed outward > 0.5 um past the ballistic path) or Falling."""
    if crashed:
        return Status.CRASHED
    x0, y0, _, vx0, vy0, _ = initial_state
    ballistic_rho = np.hypot(x0 + vx0 * t_total, y0 + vy0 * t_total)
    if np.hypot(final_state[0], final_state[1]) - ballistic_rho > ESCAPE_MARGIN_UM:
        return Status.ESCAPED
    return Status.FALLING


def diffusion_noise(rng, n_steps: int, enabled: bool = True) -> np.ndarray:
    """Standard-normal kicks W (n_steps, 3); zeros when diffusion is off."""
    if not enabled:
        return np.zeros((n_steps, 3))
    return rng.standard_normal((n_steps, 3))


def propagate_transit(setup: TransitSetup, initial_state, t0: float, n_steps: int,
                      noise=None, params=None, backend: str | None = None,
                      crashed: bool = False) -> Trajectory:
    """Integrate one trajectory for ``n_steps`` steps of ``setup.dt`` from time t0.

    ``initial_state`` is (x, y, z, vx, vy, vz). ``noise`` defaults to zeros
    (deterministic); ``params`` defaults to the nominal cavity.
    """
    be = K.get_backend(backend)
    p = pack_params(setup) if params is None else np.asarray(params, float)
    tog = _toggles(setup)
    _, _, tables = surface_tables(setup.surface)
    g0, g1, g2 = _grids(setup)
    state = np.asarray(initial_state, float)
    noise = np.zeros((n_steps, 3)) if noise is None else np.asarray(noise, float)
    if noise.shape != (n_steps, 3):
        raise ValueError("noise must have shape (n_steps, 3)")
    if be.name == "numba":
        rec, final, hit, step = be.run(state, float(t0), float(setup.dt), int(n_steps), p, tog,
                                       tables, g0, g1, g2, noise, bool(crashed))
    else:
        rec, final, hit, step = be.run(state[None, :], float(t0), float(setup.dt), int(n_steps),
                                       p[:, None], tog, tables, g0, g1, g2, noise[None],
                                       np.array([crashed]))
        rec, final, hit, step = rec[0], final[0], bool(hit[0]), int(step[0])
    status = classify(final, state, n_steps * setup.dt, bool(hit))
    return Trajectory(rec, final, status, int(step))


def propagate_batch(setup: TransitSetup, states, t0, n_steps, noises, params_list,
                    backend: str | None = None, batch: int = 8):
    """Propagate many trajectories; numpy backend vectorises over ``batch`` at a time."""
    be = K.get_backend(backend)
    if be.name == "numba":
        return [propagate_transit(setup, s, t, n_steps, w, p, "numba")
                for s, t, w, p in zip(states, t0, noises, params_list)]
    out = []
    tog = _toggles(setup)
    _, _, tables = surface_tables(setup.surface)
    g0, g1, g2 = _grids(setup)
    for start in range(0, len(states), batch):
        sl = slice(start, start + batch)
        st = np.asarray(states[sl], float)
        t_start = np.asarray(t0[sl], float)
        if not np.all(t_start == t_start[0]):
            out.extend(propagate_transit(setup, s, t, n_steps, w, p, "numpy")
                       for s, t, w, p in zip(states[sl], t0[sl], noises[sl], params_list[sl]))
            continue
        rec, final, hit, step = be.run(st, float(t_start[0]), float(setup.dt), int(n_steps),
                                       np.stack(params_list[sl], axis=1), tog, tables, g0, g1, g2,
                                       np.stack(noises[sl]), np.zeros(len(st), bool))
        for k in range(len(st)):
            out.append(Trajectory(rec[k], final[k],
                                  classify(final[k], st[k], n_steps * setup.dt, bool(hit[k])),
                                  int(step[k])))
    return out


def mechanical_energy(setup: TransitSetup, record: np.ndarray) -> np.ndarray:
    """Kinetic + gravitational + ground-state surface energy per unit mass (um^2/us^2)."""
    v2 = (record[:, K.REC_VX] ** 2 + record[:, K.REC_VY] ** 2 + record[:, K.REC_VZ] ** 2)
    e = 0.5 * v2 + const.G_EARTH_UM_US2 * record[:, K.REC_Z]
    if setup.surface is not None and setup.toggles.surface:
        e = e + const.HBAR_OVER_M * setup.surface.ground(np.maximum(record[:, K.REC_D],
                                                                    setup.surface.ground.table.d_min))
    return e


def check_energy_conservation(setup: TransitSetup, trajectory: Trajectory, threshold: float = 1e-4):
    """Raise IntegrationError when the relative energy drift exceeds ``threshold``.

    Intended for conservative runs (no drive, no diffusion). Returns the drift.
    """
    e = mechanical_energy(setup, trajectory.record)
    scale = max(abs(e[0]), 0.5 * float(np.sum(trajectory.record[0, K.REC_VX:K.REC_VZ + 1] ** 2)))
    drift = float(np.max(np.abs(e - e[0])) / scale)
    if drift > threshold:
        i = int(np.argmax(np.abs(e - e[0])))
        raise IntegrationError(f"energy drift {drift:.2e} at step {i} (t={trajectory.time[i]:.4f} us, "
                               f"d={trajectory.record[i, K.REC_D]:.4f} um)")
    return drift


def free_fall_state(state, t):
    """Exact ballistic state after time t under gravity alone."""
    x, y, z, vx, vy, vz = np.asarray(state, float)
    g = const.G_EARTH_UM_US2
    return np.array([x + vx * t, y + vy * t, z + vz * t - 0.5 * g * t * t, vx, vy, vz - g * t])
