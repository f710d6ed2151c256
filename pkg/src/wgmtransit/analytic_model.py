"""Closed-form model of triggered-atom distributions and spectra.

Atoms fall at constant speed through a Gaussian coupling profile, crossing at
distances spread uniformly over the evanescent decay. Time-weighted, this
gives p_atom(g) ~ sqrt(ln(g_max/g))/g. The trigger probability is the Poisson
tail of the counts collected in one window at the instantaneous
transmission T(g, theta). Normalisation constants are fixed numerically on
(g_max 1e-4, g_max) x [0, 2 pi).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import constants as const
from . import cqed_core as cq


class AnalyticDomainError(ValueError):
    pass


class NormalizationError(RuntimeError):
    pass


@dataclass(frozen=True)
class FallModelParams:
    """Rates in rad/us, speed in um/us, window in us.

    ``delta_ca`` is omega_c - omega_a0; the probe sits ``probe_offset`` above
    the cavity.
    """

    g_max: float
    kappa_i: float
    kappa_ex: float
    h: float
    gamma: float = const.mhz_to_rad_us(const.CS_D2_GAMMA_MHZ)
    delta_ca: float = 0.0
    probe_offset: float = 0.0
    z0_um: float = 0.5
    fall_speed: float = 0.2
    threshold_counts: int = 4
    window_us: float = 0.5
    input_flux: float = 15.0
    g_floor: float = 1e-4

    def __post_init__(self):
        if self.g_max <= 0 or self.z0_um <= 0 or self.fall_speed <= 0:
            raise ValueError("g_max, z0 and fall speed must be positive")

    @property
    def transit_time_us(self) -> float:
        return self.z0_um / self.fall_speed

    def cqed(self, g, theta, probe_offset=None) -> cq.CqedParams:
        off = self.probe_offset if probe_offset is None else probe_offset
        g_tw = np.asarray(g) / np.sqrt(2.0) * np.exp(1j * np.asarray(theta))
        return cq.CqedParams(self.kappa_i, self.kappa_ex, self.h, self.gamma, -off,
                             -self.delta_ca - off, g_tw, self.input_flux)


def p_atom(g, g_max: float):
    """Unnormalised time-weighted coupling density sqrt(ln(g_max/g))/g."""
    g = np.asarray(g, float)
    if np.any((g <= 0) | (g > g_max)):
        raise AnalyticDomainError("g must lie in (0, g_max]")
    return np.sqrt(np.log(g_max / g)) / g


def transmission(params: FallModelParams, g, theta, probe_offset=None):
    """Linear steady-state transmission at coupling g (standing-wave units) and phase theta."""
    p = params.cqed(g, theta, probe_offset)
    a, b, _ = cq.linear_amplitudes(p.kappa, p.delta_cp, p.gamma, p.delta_ap, p.h, p.g_tw, p.drive)
    t, _ = cq.output_ratios(a, b, p.kappa_ex, p.drive)
    return t


def p_trigger(params: FallModelParams, g, theta):
    """P(Poisson(T P_in dt_th) >= C_th)."""
    if params.threshold_counts <= 0:
        return np.ones(np.broadcast(np.asarray(g), np.asarray(theta)).shape)
    mean = transmission(params, g, theta) * params.input_flux * params.window_us
    return stats.poisson.sf(params.threshold_counts - 1, mean)


@dataclass(frozen=True)
class FallGrid:
    """Quadrature nodes in (ln g, theta) with weights for dg dtheta."""

    g: np.ndarray
    theta: np.ndarray
    weight_g: np.ndarray
    weight_theta: float


def fall_grid(params: FallModelParams, n_g: int = 240, n_theta: int = 64) -> FallGrid:
    lo = np.log(params.g_max * params.g_floor)
    hi = np.log(params.g_max)
    # sqrt singularity of p_atom at g_max: use u = sqrt(ln(g_max/g)) as variable
    x, w = np.polynomial.legendre.leggauss(n_g)
    u_max = np.sqrt(hi - lo)
    u = 0.5 * u_max * (x + 1.0)
    g = params.g_max * np.exp(-u * u)
    # dg = -2 u g du
    wg = 0.5 * u_max * w * 2.0 * u * g
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    return FallGrid(g, theta, wg, 2.0 * np.pi / n_theta)


def p_fall_joint(params: FallModelParams, grid: FallGrid | None = None):
    """Normalised p_fall(g, theta) on the grid; returns (grid, density[n_g, n_theta])."""
    grid = grid or fall_grid(params)
    gg, tt = np.meshgrid(grid.g, grid.theta, indexing="ij")
    dens = p_atom(gg, params.g_max) * p_trigger(params, gg, tt)
    norm = float(np.sum(dens * grid.weight_g[:, None]) * grid.weight_theta)
    if not np.isfinite(norm) or norm <= 0:
        raise NormalizationError(f"p_fall normalisation {norm}")
    return grid, dens / norm


def normalization_check(params: FallModelParams) -> float:
    """Relative change of the unnormalised integral when nodes are doubled."""
    vals = []
    for n_g, n_t in ((240, 64), (480, 128)):
        grid = fall_grid(params, n_g, n_t)
        gg, tt = np.meshgrid(grid.g, grid.theta, indexing="ij")
        dens = p_atom(gg, params.g_max) * p_trigger(params, gg, tt)
        vals.append(float(np.sum(dens * grid.weight_g[:, None]) * grid.weight_theta))
    return abs(vals[1] - vals[0]) / abs(vals[1])


def p_fall_marginal(params: FallModelParams, grid: FallGrid | None = None):
    """(g nodes, p_fall(g)) after integrating over theta."""
    grid, dens = p_fall_joint(params, grid)
    return grid.g, dens.sum(axis=1) * grid.weight_theta


def marginal_cdf(params: FallModelParams, n: int = 4000):
    """Callable CDF of p_fall(g) built on a fine grid (for KS tests)."""
    grid = fall_grid(params, 240, 64)
    g_nodes, _ = p_fall_marginal(params, grid)
    lo = params.g_max * params.g_floor
    edges = np.geomspace(lo, params.g_max, n)
    mid = np.sqrt(edges[1:] * edges[:-1])
    theta = grid.theta
    gg, tt = np.meshgrid(mid, theta, indexing="ij")
    dens = (p_atom(gg, params.g_max) * p_trigger(params, gg, tt)).sum(axis=1)
    mass = dens * np.diff(edges)
    cdf = np.concatenate([[0.0], np.cumsum(mass)])
    cdf /= cdf[-1]

    def F(g):
        return np.interp(np.asarray(g, float), edges, cdf, left=0.0, right=1.0)
    return F


def mean_coupling(params: FallModelParams) -> float:
    g, p = p_fall_marginal(params)
    grid = fall_grid(params)
    return float(np.sum(g * p * grid.weight_g))


def spectrum(params: FallModelParams, probe_offsets, grid: FallGrid | None = None):
    """Ensemble transmission for each probe offset (omega_p - omega_c, rad/us)."""
    grid, dens = p_fall_joint(params, grid)
    gg, tt = np.meshgrid(grid.g, grid.theta, indexing="ij")
    out = []
    for off in np.atleast_1d(probe_offsets):
        t = transmission(params, gg, tt, off)
        out.append(float(np.sum(t * dens * grid.weight_g[:, None]) * grid.weight_theta))
    return np.array(out)


def sample_constant_velocity(params: FallModelParams, rng, size: int, band_decays: float = 12.0):
    """Monte-Carlo couplings for straight falls sampled uniformly in time.

    Crossing distances are uniform over ``band_decays`` evanescent lengths, so
    the peak coupling g_c = g_max exp(-d/lambda) is log-uniform; the result
    follows p_atom for g above g_max exp(-band_decays).
    """
    decay = rng.uniform(0.0, band_decays, size)
    g_c = params.g_max * np.exp(-decay)
    z = rng.uniform(-4.0, 4.0, size) * params.z0_um
    return g_c * np.exp(-(z / params.z0_um) ** 2)
