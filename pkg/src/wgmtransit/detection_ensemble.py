"""Real-time detection emulation and ensemble observables.

Candidates are drawn from a Gaussian cloud, pre-filtered by their free-fall
crossing of the equatorial plane, given frozen cavity jitter, gated on the
bare-cavity noise flux, propagated through a 50 us window, converted to
photon counts and tested against a rolling-window threshold.

Random numbers come from named sub-streams of one master seed, keyed by
(stream, candidate index), so results do not depend on worker count and any
triggered trajectory can be replayed from its record.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import constants as const
from . import cqed_core as cq
from . import forces_dynamics as fd
from . import kernels as K
from .geometry_modes import ToroidGeometry

log = logging.getLogger(__name__)

STREAM_CLOUD, STREAM_JITTER, STREAM_COUNTS, STREAM_DIFFUSION = 0, 1, 2, 3
RECORD_SCHEMA = "wgmtransit-trigger-record"
RECORD_VERSION = 1


class TargetUnreachable(RuntimeError):
    """The sampling budget ran out before enough trajectories triggered."""

    def __init__(self, message, records=None, stats=None):
        super().__init__(message)
        self.records = records or []
        self.stats = stats or {}


def stream(seed: int, stream_id: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(stream_id, int(index))))


# ---------------------------------------------------------------------------
# configuration types


@dataclass(frozen=True)
class CloudModel:
    """Gaussian atom cloud released above the resonator."""

    center_xy_um: tuple = (0.0, 0.0)
    drop_height_um: float = 2040.0
    sigma_um: tuple = (150.0, 150.0, 150.0)
    temperature_uk: float = 10.0

    def __post_init__(self):
        if any(s <= 0 for s in self.sigma_um):
            raise ValueError("cloud widths must be positive")
        if self.temperature_uk < 0:
            raise ValueError("cloud temperature must be non-negative")

    @property
    def velocity_sigma(self) -> float:
        """Per-axis Maxwell-Boltzmann velocity spread in um/us."""
        return math.sqrt(const.K_B * self.temperature_uk * 1e-6 / const.M_CS)


@dataclass(frozen=True)
class JitterModel:
    """Per-trajectory cavity jitter (cyclic MHz) and bare-cavity noise gate (counts/us)."""

    sigma_kappa_ex_mhz: float = 3.0
    sigma_omega_c_mhz: float = 1.5
    noise_gate: float = 0.4

    def __post_init__(self):
        if self.sigma_kappa_ex_mhz < 0 or self.sigma_omega_c_mhz < 0:
            raise ValueError("jitter widths must be non-negative")


@dataclass(frozen=True)
class TriggerConfig:
    threshold_counts: int = 4
    window_ns: float = 500.0
    bin_ns: float = 1.0
    input_flux: float = 15.0
    spectra_window_ns: tuple = (250.0, 750.0)
    n_target: int = 400
    transit_window_us: float = 50.0
    max_samples: int = 4_000_000_000
    band_um: float = 1.0

    def __post_init__(self):
        if self.threshold_counts < 0:
            raise ValueError("threshold_counts must be non-negative")
        ratio = self.window_ns / self.bin_ns
        if abs(ratio - round(ratio)) > 1e-9 or ratio < 1:
            raise ValueError("window_ns must be a positive multiple of bin_ns")

    @property
    def window_bins(self) -> int:
        return int(round(self.window_ns / self.bin_ns))


@dataclass(frozen=True)
class TriggerRecord:
    """Minimal tuple from which a triggered trajectory is replayed exactly."""

    index: int
    seed: int
    r_in: tuple
    v_in: tuple
    t_cross: float
    kappa_ex: float
    cavity_shift: float
    trigger_time: float
    g_trigger: float
    theta_trigger: float
    status: str

    def to_json(self) -> str:
        d = asdict(self)
        d["schema"] = RECORD_SCHEMA
        d["version"] = RECORD_VERSION
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "TriggerRecord":
        d = json.loads(line)
        if d.pop("schema", None) != RECORD_SCHEMA or d.pop("version", None) != RECORD_VERSION:
            raise ValueError("unsupported trigger record schema")
        d["r_in"] = tuple(d["r_in"])
        d["v_in"] = tuple(d["v_in"])
        return cls(**d)


def save_records(records, path) -> None:
    with open(path, "w") as fh:
        for r in records:
            fh.write(r.to_json() + "\n")


def load_records(path):
    with open(path) as fh:
        return [TriggerRecord.from_json(line) for line in fh if line.strip()]


# ---------------------------------------------------------------------------
# sampling and pre-filter


def sample_initial_conditions(cloud: CloudModel, rng, size: int):
    """Gaussian positions and Maxwell-Boltzmann velocities, arrays (size, 3)."""
    center = np.array([cloud.center_xy_um[0], cloud.center_xy_um[1], cloud.drop_height_um])
    r = center + rng.standard_normal((size, 3)) * np.asarray(cloud.sigma_um)
    v = rng.standard_normal((size, 3)) * cloud.velocity_sigma
    return r, v


def crossing_time(r_in, v_in):
    """Time to fall through z = 0 under gravity alone (nan if never)."""
    g = const.G_EARTH_UM_US2
    z0 = np.asarray(r_in)[..., 2]
    vz = np.asarray(v_in)[..., 2]
    disc = vz * vz + 2.0 * g * z0
    with np.errstate(invalid="ignore"):
        return np.where(disc >= 0, (vz + np.sqrt(np.maximum(disc, 0.0))) / g, np.nan)


def prefilter(r_in, v_in, geometry: ToroidGeometry, band_um: float = 1.0):
    """Accept atoms whose free-fall crossing of z = 0 lies within ``band_um`` outside the rim.

    Returns (accept mask, crossing time). Only the outer band is used; the
    inner side of the torus carries no mode amplitude.
    """
    t = crossing_time(r_in, v_in)
    r_in = np.asarray(r_in)
    v_in = np.asarray(v_in)
    x = r_in[..., 0] + v_in[..., 0] * t
    y = r_in[..., 1] + v_in[..., 1] * t
    d = np.hypot(x, y) - geometry.principal_diameter_um / 2.0
    with np.errstate(invalid="ignore"):
        ok = (d >= 0.0) & (d <= band_um) & (t > 0)
    return ok, t


def annulus_acceptance(cloud: CloudModel, geometry: ToroidGeometry, band_um: float = 1.0) -> float:
    """Closed-form acceptance for a zero-temperature cloud centred on the axis."""
    s = cloud.sigma_um[0]
    if cloud.sigma_um[0] != cloud.sigma_um[1] or any(cloud.center_xy_um):
        raise ValueError("closed form needs an axis-centred, round cloud")
    r0 = geometry.principal_diameter_um / 2.0
    return math.exp(-r0**2 / (2 * s * s)) - math.exp(-(r0 + band_um) ** 2 / (2 * s * s))


def candidate_stream(cloud: CloudModel, geometry: ToroidGeometry, seed: int, band_um: float = 1.0,
                     chunk: int = 1 << 18, max_samples: int | None = None):
    """Yield (index, r_in, v_in, t_cross, samples_so_far) for accepted atoms in order."""
    j = 0
    drawn = 0
    b = 0
    while max_samples is None or drawn < max_samples:
        rng = stream(seed, STREAM_CLOUD, b)
        r, v = sample_initial_conditions(cloud, rng, chunk)
        ok, t = prefilter(r, v, geometry, band_um)
        drawn += chunk
        for k in np.flatnonzero(ok):
            yield j, r[k], v[k], float(t[k]), drawn
            j += 1
        b += 1


# ---------------------------------------------------------------------------
# counting and triggering


def generate_counts(transmission, input_flux: float, bin_us: float, rng) -> np.ndarray:
    """Independent Poisson counts per bin with mean T P_in dt."""
    lam = np.clip(np.asarray(transmission, float), 0.0, None) * input_flux * bin_us
    return rng.poisson(lam)


def first_trigger(counts, window_bins: int, threshold: int) -> int:
    """First bin index whose trailing window sum reaches ``threshold`` (-1 if none)."""
    if threshold <= 0:
        return 0
    c = np.cumsum(counts)
    lagged = np.concatenate([np.zeros(window_bins, c.dtype), c[:-window_bins]]) if len(c) > window_bins \
        else np.zeros_like(c)
    hits = np.flatnonzero(c - lagged >= threshold)
    return int(hits[0]) if hits.size else -1


def window_trigger_probability(mean_counts: float, threshold: int) -> float:
    """P(Poisson(mean) >= threshold)."""
    from scipy import stats
    if threshold <= 0:
        return 1.0
    return float(stats.poisson.sf(threshold - 1, mean_counts))


def bin_transmission(transmission, dt: float, bin_us: float):
    """Average a per-step series into counting bins (bin must be a multiple of dt)."""
    ratio = bin_us / dt
    n = int(round(ratio))
    if abs(ratio - n) > 1e-6 or n < 1:
        raise ValueError("counting bin must be a multiple of the integration step")
    if n == 1:
        return np.asarray(transmission)
    m = len(transmission) // n
    return np.asarray(transmission)[: m * n].reshape(m, n).mean(axis=1)


# ---------------------------------------------------------------------------
# pipeline


@dataclass(frozen=True)
class PipelineContext:
    setup: fd.TransitSetup
    cloud: CloudModel
    jitter: JitterModel
    trigger: TriggerConfig
    seed: int
    backend: str | None = None

    @property
    def n_steps(self) -> int:
        return int(round(self.trigger.transit_window_us / self.setup.dt))

    @property
    def t_start(self) -> float:
        return -0.5 * self.trigger.transit_window_us


def detection_setup(setup: fd.TransitSetup, trigger: TriggerConfig, offset: float = 0.0) -> fd.TransitSetup:
    """Setup with the detection probe (offset from nominal cavity, trigger flux)."""
    probe = fd.ProbeSettings(offset, trigger.input_flux)
    return replace(setup, probe=probe, probe_after_switch=None, t_switch=np.inf)


def draw_jitter(ctx: PipelineContext, index: int):
    rng = stream(ctx.seed, STREAM_JITTER, index)
    w = rng.standard_normal(2)
    cav = ctx.setup.cavity
    kex = cav.kappa_ex + const.mhz_to_rad_us(ctx.jitter.sigma_kappa_ex_mhz) * w[0]
    shift = const.mhz_to_rad_us(ctx.jitter.sigma_omega_c_mhz) * w[1]
    return float(kex), float(shift)


def bare_flux(setup: fd.TransitSetup, kappa_ex: float, cavity_shift: float, input_flux: float) -> float:
    """Bare-cavity output flux for a probe at the nominal cavity frequency."""
    cav = setup.cavity
    params = cq.CqedParams(cav.kappa_i, kappa_ex, cav.h, cav.gamma, cavity_shift, 0.0, 0.0, input_flux)
    return cq.steady_state_linear(params).transmission * input_flux


def start_state(ctx: PipelineContext, r_in, v_in, t_cross: float):
    state0 = np.concatenate([np.asarray(r_in, float), np.asarray(v_in, float)])
    return fd.free_fall_state(state0, t_cross + ctx.t_start)


def _noise(ctx: PipelineContext, index: int, n_steps: int):
    return fd.diffusion_noise(stream(ctx.seed, STREAM_DIFFUSION, index), n_steps,
                              ctx.setup.toggles.diffusion)


def run_candidate(ctx: PipelineContext, index: int, r_in, v_in, t_cross: float,
                  setup: fd.TransitSetup | None = None, n_steps: int | None = None):
    """Propagate one candidate; returns dict with gate/trigger outcome and the trajectory."""
    kex, shift = draw_jitter(ctx, index)
    setup = setup or detection_setup(ctx.setup, ctx.trigger)
    trig = ctx.trigger
    if kex <= 0 or bare_flux(setup, kex, shift, trig.input_flux) >= ctx.jitter.noise_gate:
        return {"index": index, "gated": True}
    n_full = ctx.n_steps
    n = n_full if n_steps is None else n_steps
    state = start_state(ctx, r_in, v_in, t_cross)
    params = fd.pack_params(setup, kex, shift)
    # kicks are drawn for at least the detection window so that shorter or
    # longer replays share the same prefix
    noise = _noise(ctx, index, max(n_full, n))[:n]
    traj = fd.propagate_transit(setup, state, ctx.t_start, n, noise, params, ctx.backend)
    bin_us = trig.bin_ns * 1e-3
    t_bins = bin_transmission(traj.transmission, setup.dt, bin_us)
    counts = generate_counts(t_bins, trig.input_flux, bin_us, stream(ctx.seed, STREAM_COUNTS, index))
    k = first_trigger(counts, trig.window_bins, trig.threshold_counts)
    out = {"index": index, "gated": False, "kappa_ex": kex, "cavity_shift": shift,
           "trajectory": traj, "counts": counts, "trigger_bin": k}
    if k >= 0:
        step = int(round(k * bin_us / setup.dt))
        rec = traj.record[step]
        out["record"] = TriggerRecord(
            index=int(index), seed=int(ctx.seed),
            r_in=tuple(float(v) for v in r_in), v_in=tuple(float(v) for v in v_in),
            t_cross=float(t_cross), kappa_ex=kex, cavity_shift=shift,
            trigger_time=float(rec[K.REC_T]), g_trigger=float(rec[K.REC_G]),
            theta_trigger=float(rec[K.REC_THETA]), status=traj.status.value)
    return out


def _summarise(out):
    """Drop heavy arrays before returning from a worker."""
    return {k: v for k, v in out.items() if k not in ("trajectory", "counts")}


_WORKER_CTX = None


def _worker_init(ctx):
    global _WORKER_CTX
    _WORKER_CTX = ctx


def _worker_run(batch):
    return [_summarise(run_candidate(_WORKER_CTX, *item)) for item in batch]


@dataclass
class PipelineResult:
    records: list
    stats: dict


def run_trigger_pipeline(ctx: PipelineContext, workers: int = 1, round_size: int = 32) -> PipelineResult:
    """Collect ``n_target`` triggered records, ordered by candidate index."""
    geom = ctx.setup.geometry
    gen = candidate_stream(ctx.cloud, geom, ctx.seed, ctx.trigger.band_um,
                           max_samples=ctx.trigger.max_samples)
    records = []
    stats = {"candidates": 0, "gated": 0, "propagated": 0, "triggered": 0, "samples": 0}
    pool = ProcessPoolExecutor(workers, initializer=_worker_init, initargs=(ctx,)) if workers > 1 else None
    try:
        exhausted = False
        while len(records) < ctx.trigger.n_target and not exhausted:
            batch = []
            for _ in range(round_size * max(workers, 1)):
                try:
                    j, r, v, t, drawn = next(gen)
                except StopIteration:
                    exhausted = True
                    break
                stats["samples"] = drawn
                batch.append((j, r, v, t))
            if pool is None:
                outs = [_summarise(run_candidate(ctx, *item)) for item in batch]
            else:
                parts = [batch[i::workers] for i in range(workers)]
                merged = [o for chunk in pool.map(_worker_run, parts) for o in chunk]
                outs = sorted(merged, key=lambda o: o["index"])
            for o in outs:
                if len(records) >= ctx.trigger.n_target:
                    break
                stats["candidates"] += 1
                if o["gated"]:
                    stats["gated"] += 1
                    continue
                stats["propagated"] += 1
                if "record" in o:
                    stats["triggered"] += 1
                    records.append(o["record"])
    finally:
        if pool is not None:
            pool.shutdown()
    if len(records) < ctx.trigger.n_target:
        raise TargetUnreachable(
            f"only {len(records)} of {ctx.trigger.n_target} triggers after {stats['samples']} samples",
            records, stats)
    return PipelineResult(records, stats)


def replay(ctx: PipelineContext, record: TriggerRecord, setup: fd.TransitSetup | None = None,
           n_steps: int | None = None):
    """Re-run a triggered candidate from its record; returns the candidate outcome dict."""
    if record.seed != ctx.seed:
        ctx = replace(ctx, seed=record.seed)
    return run_candidate(ctx, record.index, np.array(record.r_in), np.array(record.v_in),
                         record.t_cross, setup, n_steps)


# ---------------------------------------------------------------------------
# aggregation


@dataclass(frozen=True)
class ProbePlan:
    """Post-trigger probe settings: offsets omega_p - omega_c (rad/us) and flux."""

    offsets: tuple = (0.0,)
    input_flux: float = 15.0
    before_us: float = 1.0
    after_us: float = 2.0

    @classmethod
    def scan_mhz(cls, start, stop, count, **kw) -> "ProbePlan":
        return cls(tuple(const.mhz_to_rad_us(np.linspace(start, stop, int(count)))), **kw)


@dataclass
class EnsembleResult:
    time_us: np.ndarray
    transmission: np.ndarray          # (n_offsets, n_time)
    reflection: np.ndarray
    offsets: np.ndarray               # probe offsets (rad/us)
    spectrum_t: np.ndarray
    spectrum_r: np.ndarray
    g_edges: np.ndarray
    g_density: np.ndarray
    theta_edges: np.ndarray
    theta_density: np.ndarray
    crash_fraction: float
    escape_fraction: float
    n_records: int
    delta_ap_offsets: np.ndarray = field(default=None)


def histogram_density(values, edges):
    counts, _ = np.histogram(values, bins=edges)
    width = np.diff(edges)
    total = counts.sum()
    return counts / (total * width) if total else np.zeros(len(width))


def time_series(ctx: PipelineContext, record: TriggerRecord, offset: float, plan: ProbePlan):
    """Replayed trajectory with the probe switched at the trigger; returns (t - t_trig, T, R)."""
    base = ctx.setup
    post = fd.ProbeSettings(offset, plan.input_flux)
    setup = replace(detection_setup(base, ctx.trigger), probe_after_switch=post,
                    t_switch=record.trigger_time)
    t_end = record.trigger_time + plan.after_us
    n = min(ctx.n_steps, int(round((t_end - ctx.t_start) / base.dt)) + 1)
    out = replay(ctx, record, setup, n)
    traj = out["trajectory"]
    rel = traj.time - record.trigger_time
    keep = rel >= -plan.before_us - 1e-9
    return rel[keep], traj.transmission[keep], traj.reflection[keep]


def aggregate(ctx: PipelineContext, records, plan: ProbePlan | None = None,
              g_bins: int = 20, theta_bins: int = 24) -> EnsembleResult:
    """Ensemble time series, spectra and trigger-time distributions."""
    if not records:
        raise ValueError("no trigger records to aggregate")
    plan = plan or ProbePlan(input_flux=ctx.trigger.input_flux)
    dt = ctx.setup.dt
    n_time = int(round((plan.before_us + plan.after_us) / dt)) + 1
    time = -plan.before_us + dt * np.arange(n_time)
    offsets = np.asarray(plan.offsets, float)
    t_sum = np.zeros((len(offsets), n_time))
    r_sum = np.zeros((len(offsets), n_time))
    n_sum = np.zeros((len(offsets), n_time))
    t1, t2 = (w * 1e-3 for w in ctx.trigger.spectra_window_ns)
    for rec in records:
        for i, off in enumerate(offsets):
            rel, tr, rf = time_series(ctx, rec, off, plan)
            idx = np.rint((rel + plan.before_us) / dt).astype(int)
            ok = (idx >= 0) & (idx < n_time)
            t_sum[i, idx[ok]] += tr[ok]
            r_sum[i, idx[ok]] += rf[ok]
            n_sum[i, idx[ok]] += 1
    with np.errstate(invalid="ignore", divide="ignore"):
        t_exp = t_sum / n_sum
        r_exp = r_sum / n_sum
    win = (time >= t1 - 1e-9) & (time <= t2 + 1e-9)
    spec_t = np.nanmean(t_exp[:, win], axis=1)
    spec_r = np.nanmean(r_exp[:, win], axis=1)
    g = np.array([r.g_trigger for r in records])
    theta = np.array([r.theta_trigger for r in records])
    g_max = ctx.setup.mode.g_max
    g_edges = np.linspace(0.0, g_max, g_bins + 1)
    th_edges = np.linspace(0.0, 2 * np.pi, theta_bins + 1)
    status = [r.status for r in records]
    return EnsembleResult(
        time, t_exp, r_exp, offsets, spec_t, spec_r,
        g_edges, histogram_density(g, g_edges), th_edges, histogram_density(theta, th_edges),
        status.count(fd.Status.CRASHED.value) / len(records),
        status.count(fd.Status.ESCAPED.value) / len(records), len(records),
        -ctx.setup.cavity.delta_ca - offsets)


def outcome_fractions(records):
    status = [r.status for r in records]
    n = len(status)
    return {s.value: status.count(s.value) / n for s in fd.Status}
