"""Command-line entry point and run orchestration.

Every subcommand reads one YAML config, writes its artifacts to ``--out`` and
adds ``metadata.json`` (effective config, its hash, seed, versions and
artifact hashes) plus ``timings.json``. Timings live in their own file so that
repeated runs with the same config and seed produce identical artifacts.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 trigger target not reached.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import platform
import sys
import time
import warnings
from dataclasses import replace
from importlib import metadata as importlib_metadata
from pathlib import Path

import numpy as np

from . import analytic_model as am
from . import casimir_polder as cp
from . import config as cfgmod
from . import constants as const
from . import cqed_core as cq
from . import detection_ensemble as de
from . import efort_trap as et
from . import forces_dynamics as fd
from . import kernels as K
from . import surface_response as sr
from .geometry_modes import ModeModel, ToroidGeometry, load_mode_grid

log = logging.getLogger("wgmtransit")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_UNREACHABLE = 0, 2, 3, 4
NUMERIC_ERRORS = (cp.ConvergenceError, cq.SteadyStateError, am.NormalizationError,
                  et.TrapCalibrationError, fd.IntegrationError, sr.CalibrationError,
                  sr.FitError, FloatingPointError, np.linalg.LinAlgError)
ENV_OUT = "WGMTRANSIT_OUT"
ENV_WORKERS = "WGMTRANSIT_WORKERS"


# ---------------------------------------------------------------------------
# config -> domain objects


def build_geometry(cfg) -> ToroidGeometry:
    g = cfg["geometry"]
    return ToroidGeometry(g["principal_diameter_um"], g["minor_diameter_um"])


def build_mode(cfg, geometry: ToroidGeometry | None = None) -> ModeModel:
    m = cfg["mode"]
    geometry = geometry or build_geometry(cfg)
    grid = load_mode_grid(m["grid_file"]) if m["grid_file"] else None
    g_max = None if m["g_max_mhz"] is None else const.mhz_to_rad_us(m["g_max_mhz"])
    mode = ModeModel(geometry, m["azimuthal_number"], m["wavelength_nm"], m["mode_width_rad"],
                     m["angular_order"], grid, g_max, m["polarization_factor"])
    return mode.with_coupling(gamma=const.mhz_to_rad_us(cfg["cqed"]["gamma_mhz"]))


def build_cavity(cfg) -> fd.CavitySettings:
    c = cfg["cqed"]
    return fd.CavitySettings.from_mhz(c["kappa_i_mhz"], c["kappa_ex_mhz"], c["h_mhz"],
                                      c["gamma_mhz"], c["delta_ca_mhz"])


def build_surface(cfg, geometry: ToroidGeometry | None = None) -> cp.SurfaceModel | None:
    s = cfg["surface"]
    if not s["enabled"]:
        return None
    geometry = geometry or build_geometry(cfg)
    shape = (cp.SurfaceGeometry.plane() if s["shape"] == "plane"
             else cp.SurfaceGeometry.cylinder(geometry.minor_radius_um))
    settings = cp.SurfaceSettings(s["temperature_k"], s["d_min_um"], s["d_max_um"], s["points"],
                                  s["resonant_scale"])
    return cp.build_surface_model(shape, settings, cache_dir=s["cache_dir"])


def build_toggles(cfg) -> fd.ForceToggles:
    f = cfg["forces"]
    return fd.ForceToggles(f["dipole"], f["surface"], f["shifts"], True,
                           f["velocity_correction"], f["diffusion"])


def build_setup(cfg, surface: cp.SurfaceModel | None = None, mode: ModeModel | None = None) -> fd.TransitSetup:
    mode = mode or build_mode(cfg)
    c = cfg["cqed"]
    probe = fd.ProbeSettings(const.mhz_to_rad_us(c["probe_offset_mhz"]), c["input_flux_per_us"])
    toggles = build_toggles(cfg)
    if surface is None:
        toggles = replace(toggles, surface=False, shifts=False)
    return fd.TransitSetup(mode, build_cavity(cfg), probe, surface=surface, toggles=toggles,
                           dt=cfg["integrator"]["dt_us"])


def build_cloud(cfg) -> de.CloudModel:
    c = cfg["cloud"]
    return de.CloudModel((c["center_x_um"], c["center_y_um"]), c["drop_height_um"],
                         (c["sigma_x_um"], c["sigma_y_um"], c["sigma_z_um"]), c["temperature_uk"])


def build_jitter(cfg) -> de.JitterModel:
    j = cfg["jitter"]
    return de.JitterModel(j["sigma_kappa_ex_mhz"], j["sigma_omega_c_mhz"], j["noise_gate_per_us"])


def build_trigger(cfg, n_target: int | None = None) -> de.TriggerConfig:
    t = cfg["trigger"]
    return de.TriggerConfig(
        t["threshold_counts"], t["window_ns"], t["bin_ns"], cfg["cqed"]["input_flux_per_us"],
        (t["spectra_window_start_ns"], t["spectra_window_end_ns"]),
        n_target or t["n_target"], t["transit_window_us"], t["max_samples"], t["band_um"])


def build_context(cfg, setup: fd.TransitSetup, seed: int | None = None,
                  n_target: int | None = None) -> de.PipelineContext:
    seed = cfg["run"]["seed"] if seed is None else seed
    return de.PipelineContext(setup, build_cloud(cfg), build_jitter(cfg), build_trigger(cfg, n_target),
                              int(seed), cfg["integrator"]["backend"])


def build_probe_plan(cfg, scan: bool) -> de.ProbePlan:
    p = cfg["probe_scan"]
    if scan:
        return de.ProbePlan.scan_mhz(p["start_mhz"], p["stop_mhz"], p["count"],
                                     input_flux=p["input_flux_per_us"], before_us=p["before_us"],
                                     after_us=p["after_us"])
    offset = const.mhz_to_rad_us(cfg["cqed"]["probe_offset_mhz"])
    return de.ProbePlan((offset,), p["input_flux_per_us"], p["before_us"], p["after_us"])


def build_trap_config(cfg) -> et.TrapConfig:
    t = cfg["trap"]
    return et.TrapConfig(
        t["red_wavelength_nm"], t["red_azimuthal_number"], t["red_angular_order"],
        t["blue_wavelength_nm"], t["blue_azimuthal_number"], t["blue_angular_order"],
        t["red_power_uw"], t["blue_power_uw"], cfg["mode"]["mode_width_rad"],
        t["red_width_scale"], cfg["mode"]["wavelength_nm"], t["target_distance_nm"],
        t["target_depth_mk"], t["trigger_delay_us"], t["post_trigger_us"],
        t["capture_threshold_mhz"], t["capture_time_us"])


def build_fall_params(cfg, g_max: float) -> am.FallModelParams:
    cav = build_cavity(cfg)
    a = cfg["analytic"]
    t = cfg["trigger"]
    return am.FallModelParams(
        g_max, cav.kappa_i, cav.kappa_ex, cav.h, cav.gamma, cav.delta_ca,
        const.mhz_to_rad_us(cfg["cqed"]["probe_offset_mhz"]), a["z0_um"],
        a["fall_speed_m_s"],                     # 1 m/s = 1 um/us
        t["threshold_counts"], t["window_ns"] * 1e-3, cfg["cqed"]["input_flux_per_us"],
        a["g_floor"])


# ---------------------------------------------------------------------------
# artifact writing


class ArtifactWriter:
    """Serialised writer for one output directory; tracks artifact hashes."""

    def __init__(self, out_dir, fmt: str = "csv"):
        self.out = Path(out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.fmt = fmt
        self.artifacts = {}

    def _register(self, path: Path):
        rel = path.relative_to(self.out).as_posix()
        self.artifacts[rel] = hashlib.sha256(path.read_bytes()).hexdigest()
        return path

    def table(self, name: str, columns: dict, fmt: str | None = None) -> Path:
        """Write equal-length columns as CSV or as a structured .npy array."""
        fmt = fmt or self.fmt
        names = list(columns)
        data = np.column_stack([np.asarray(columns[n], float) for n in names])
        path = self.out / name
        path.parent.mkdir(parents=True, exist_ok=True)
        if fmt == "binary":
            path = path.with_suffix(".npy")
            arr = np.empty(len(data), dtype=[(n, "<f8") for n in names])
            for i, n in enumerate(names):
                arr[n] = data[:, i]
            np.save(path, arr, allow_pickle=False)
        else:
            path = path.with_suffix(".csv")
            np.savetxt(path, data, delimiter=",", header=",".join(names), comments="", fmt="%.12e")
        return self._register(path)

    def trajectory(self, name: str, traj: fd.Trajectory) -> Path:
        cols = {c: traj.record[:, i] for i, c in enumerate(K.RECORD_COLUMNS)}
        return self.table(name, cols)

    def json(self, name: str, payload) -> Path:
        path = self.out / name
        path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n")
        return self._register(path)

    def records(self, name: str, records) -> Path:
        path = self.out / name
        de.save_records(records, path)
        return self._register(path)

    def text(self, name: str, body: str) -> Path:
        path = self.out / name
        path.write_text(body)
        return self._register(path)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serialisable: {type(obj)}")


def _versions() -> dict:
    out = {"python": platform.python_version(), "numpy": np.__version__}
    for pkg in ("artifact", "scipy", "numba", "pyyaml"):
        try:
            out[pkg] = importlib_metadata.version(pkg)
        except importlib_metadata.PackageNotFoundError:
            out[pkg] = None
    return out


# ---------------------------------------------------------------------------
# subcommands


def cmd_cp_potential(cfg, args, w: ArtifactWriter) -> dict:
    geom = build_geometry(cfg)
    s = cfg["surface"]
    settings = cp.SurfaceSettings(s["temperature_k"], s["d_min_um"], s["d_max_um"], s["points"],
                                  s["resonant_scale"])
    cols, fits = {}, {}
    for label, shape in (("plane", cp.SurfaceGeometry.plane()),
                         ("cylinder", cp.SurfaceGeometry.cylinder(geom.minor_radius_um))):
        model = cp.build_surface_model(shape, settings, cache_dir=s["cache_dir"])
        cols.setdefault("d_um", model.ground.d_um)
        cols[f"{label}_ground_mhz"] = const.rad_us_to_mhz(model.ground.u_rad_us)
        cols[f"{label}_excited_mhz"] = const.rad_us_to_mhz(model.excited.u_rad_us)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", cp.RegimeWarning)
                fit = cp.regime_fit(model.ground)
            fits[label] = {"c3_hz_um3": fit.c3_hz_um3, "c4_hz_um4": fit.c4_hz_um4,
                           "thermal_hz_um3": fit.thermal.coefficient_hz}
        except ValueError as exc:
            fits[label] = {"error": str(exc)}
    w.table("cp_potential", cols)
    w.json("cp_fit.json", fits)
    return fits


def cmd_decay_rates(cfg, args, w: ArtifactWriter) -> dict:
    geom = build_geometry(cfg)
    model = build_surface(cfg, geom) if cfg["surface"]["enabled"] else None
    if model is None:
        raise cfgmod.ConfigError("surface.enabled: decay rates need the surface model")
    d = model.parallel.d_um
    w.table("decay_rates", {"d_um": d, "parallel": model.parallel.ratio,
                            "perpendicular": model.perpendicular.ratio,
                            "isotropic": cp.isotropic_rate(model.parallel.ratio,
                                                           model.perpendicular.ratio)})
    return {"points": len(d)}


def cmd_spectrum(cfg, args, w: ArtifactWriter) -> dict:
    mode = build_mode(cfg)
    cav = build_cavity(cfg)
    c = cfg["cqed"]
    p = cfg["probe_scan"]
    offsets_mhz = np.linspace(p["start_mhz"], p["stop_mhz"], p["count"])
    g_sw = mode.g_max if args.g_mhz is None else const.mhz_to_rad_us(args.g_mhz)
    g_tw = g_sw / np.sqrt(2.0) * np.exp(1j * args.theta)
    cols = {"offset_mhz": offsets_mhz}
    for label, g in (("bare", 0.0), ("atom", g_tw)):
        t_vals, r_vals = [], []
        for off in const.mhz_to_rad_us(offsets_mhz):
            params = cq.CqedParams(cav.kappa_i, cav.kappa_ex, cav.h, cav.gamma, -off,
                                   -cav.delta_ca - off, g, c["input_flux_per_us"])
            t, r = cq.transmission(params, c["solver"], **(
                {"fock_cutoff": c["fock_cutoff"]} if c["solver"] == "full" else {}))
            t_vals.append(t)
            r_vals.append(r)
        cols[f"T_{label}"] = t_vals
        cols[f"R_{label}"] = r_vals
    w.table("spectrum", cols)
    return {"g_mhz": const.rad_us_to_mhz(g_sw), "theta": args.theta}


def _context_from(cfg, args):
    geom = build_geometry(cfg)
    surface = build_surface(cfg, geom)
    setup = build_setup(cfg, surface, build_mode(cfg, geom))
    return build_context(cfg, setup, args.seed, args.n_target)


def cmd_transit(cfg, args, w: ArtifactWriter) -> dict:
    ctx = _context_from(cfg, args)
    gen = de.candidate_stream(ctx.cloud, ctx.setup.geometry, ctx.seed, ctx.trigger.band_um,
                              max_samples=ctx.trigger.max_samples)
    done, summary = 0, []
    for j, r, v, t, _ in gen:
        out = de.run_candidate(ctx, j, r, v, t)
        if out["gated"]:
            continue
        traj = out["trajectory"]
        w.trajectory(f"trajectories/candidate_{j:06d}", traj)
        summary.append({"index": j, "status": traj.status.value, "trigger_bin": out["trigger_bin"],
                        "max_g_mhz": float(traj.coupling.max() / const.TWO_PI)})
        done += 1
        if done >= args.count:
            break
    w.json("transit_summary.json", summary)
    return {"trajectories": done}


def _workers(args, cfg) -> int:
    if args.workers:
        return args.workers
    env = os.environ.get(ENV_WORKERS)
    return int(env) if env else cfg["run"]["workers"]


def cmd_ensemble(cfg, args, w: ArtifactWriter) -> dict:
    ctx = _context_from(cfg, args)
    workers = _workers(args, cfg)
    try:
        res = de.run_trigger_pipeline(ctx, workers)
    except de.TargetUnreachable as exc:
        w.records("records.jsonl", exc.records)
        w.json("pipeline_stats.json", exc.stats)
        raise
    w.records("records.jsonl", res.records)
    w.json("pipeline_stats.json", res.stats)
    plan = build_probe_plan(cfg, args.detuning_scan)
    ens = de.aggregate(ctx, res.records, plan)
    w.table("spectra", {"probe_offset_mhz": const.rad_us_to_mhz(ens.offsets),
                        "delta_ap_mhz": const.rad_us_to_mhz(ens.delta_ap_offsets),
                        "T": ens.spectrum_t, "R": ens.spectrum_r})
    cols = {"t_us": ens.time_us}
    for i, off in enumerate(ens.offsets):
        tag = f"{const.rad_us_to_mhz(off):+.3f}"
        cols[f"T_{tag}"] = ens.transmission[i]
        cols[f"R_{tag}"] = ens.reflection[i]
    w.table("time_series", cols)
    w.table("g_histogram", {"g_lo_mhz": const.rad_us_to_mhz(ens.g_edges[:-1]),
                            "g_hi_mhz": const.rad_us_to_mhz(ens.g_edges[1:]),
                            "density_per_rad_us": ens.g_density})
    w.table("theta_histogram", {"theta_lo": ens.theta_edges[:-1], "theta_hi": ens.theta_edges[1:],
                                "density": ens.theta_density})
    if args.dump_trajectories:
        _dump_replays(ctx, res.records, w)
    out = {"stats": res.stats, "crash_fraction": ens.crash_fraction,
           "escape_fraction": ens.escape_fraction, "records": ens.n_records}
    w.json("ensemble_summary.json", out)
    return out


def _dump_replays(ctx, records, w: ArtifactWriter):
    for rec in records:
        traj = de.replay(ctx, rec)["trajectory"]
        w.trajectory(f"trajectories/record_{rec.index:08d}", traj)


def cmd_replay(cfg, args, w: ArtifactWriter) -> dict:
    if not args.records:
        raise cfgmod.ConfigError("replay needs --records")
    records = de.load_records(args.records)
    ctx = _context_from(cfg, args)
    _dump_replays(ctx, records, w)
    return {"replayed": len(records)}


def cmd_trap(cfg, args, w: ArtifactWriter) -> dict:
    ctx = _context_from(cfg, args)
    trap_cfg = build_trap_config(cfg)
    geom = ctx.setup.geometry
    cal = et.calibrate_trap(trap_cfg, geom, ctx.setup.surface)
    d = np.linspace(0.02, 1.0, 491)
    pot = et.equator_scan(trap_cfg, cal, geom, d, ctx.setup.surface)
    w.table("trap_potential_z0", {"d_um": d, "U_red_mk": pot.red / const.MK_RAD_US,
                                  "U_blue_mk": pot.blue / const.MK_RAD_US,
                                  "U_trap_mk": pot.trap / const.MK_RAD_US,
                                  "U_total_mk": pot.total / const.MK_RAD_US})
    minimum = et.find_minimum(trap_cfg, cal, geom, ctx.setup.surface)
    workers = _workers(args, cfg)
    records = de.run_trigger_pipeline(ctx, workers).records
    w.records("records.jsonl", records)
    study_on = et.run_trap_study(trap_cfg, ctx, records, cal, probe_on=True, workers=workers)
    study_off = et.run_trap_study(trap_cfg, ctx, records, cal, probe_on=False, workers=workers)
    for o in study_on.outcomes:
        if o.captured:
            w.table(f"orbits/record_{o.index:08d}",
                    {"t_us": o.orbit[:, 0], "x_um": o.orbit[:, 1], "y_um": o.orbit[:, 2],
                     "z_um": o.orbit[:, 3]})
    out = {"calibration": cal.to_dict(),
           "minimum": {"distance_nm": minimum.distance_nm, "depth_mk": minimum.depth_mk},
           "probe_on": study_on.summary(), "probe_off": study_off.summary()}
    w.json("trap_summary.json", out)
    return out


def cmd_analytic(cfg, args, w: ArtifactWriter) -> dict:
    mode = build_mode(cfg)
    params = build_fall_params(cfg, mode.g_max)
    a = cfg["analytic"]
    grid = am.fall_grid(params, a["g_points"], a["theta_points"])
    g, marginal = am.p_fall_marginal(params, grid)
    w.table("p_fall_g", {"g_mhz": const.rad_us_to_mhz(g), "density_per_rad_us": marginal,
                         "weight": grid.weight_g})
    _, joint = am.p_fall_joint(params, grid)
    gg, tt = np.meshgrid(grid.g, grid.theta, indexing="ij")
    w.table("p_fall_g_theta", {"g_mhz": const.rad_us_to_mhz(gg.ravel()), "theta": tt.ravel(),
                               "density": joint.ravel()})
    p = cfg["probe_scan"]
    offsets_mhz = np.linspace(p["start_mhz"], p["stop_mhz"], p["count"])
    spec = am.spectrum(params, const.mhz_to_rad_us(offsets_mhz), grid)
    w.table("analytic_spectrum", {"probe_offset_mhz": offsets_mhz, "T": spec})
    return {"mean_g_mhz": const.rad_us_to_mhz(am.mean_coupling(params)),
            "normalization_change": am.normalization_check(params)}


def cmd_fit_dielectric(cfg, args, w: ArtifactWriter) -> dict:
    energy, n, k = sr.load_nk_table(args.nk_table)
    model = sr.fit_dielectric(energy, n, k, count=args.oscillators, label="fit")
    import yaml
    w.text("oscillators.yaml", yaml.safe_dump(model.to_dict(), sort_keys=True))
    xi = np.geomspace(1e13, 1e18, 200)
    w.table("eps_imag_axis", {"xi_rad_s": xi, "eps": sr.epsilon_imag_axis(model, xi)})
    return {"rms_residual": model.residual, "static": model.static_value}


COMMANDS = {
    "cp-potential": (cmd_cp_potential, "Casimir-Polder curves for plane and cylinder, ground and excited"),
    "decay-rates": (cmd_decay_rates, "surface-modified decay ratios for both dipole orientations"),
    "spectrum": (cmd_spectrum, "steady-state T and R versus probe detuning"),
    "transit": (cmd_transit, "propagate individual candidate atoms and dump trajectories"),
    "ensemble": (cmd_ensemble, "triggered ensemble: records, spectra, time series, histograms"),
    "trap": (cmd_trap, "trap calibration and capture statistics"),
    "analytic": (cmd_analytic, "closed-form p_fall and spectrum"),
    "replay": (cmd_replay, "re-run trajectories from trigger records"),
    "fit-dielectric": (cmd_fit_dielectric, "fit Lorentz oscillators to an n, k table"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wgmtransit", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--config", default=str(cfgmod.DEFAULT_CONFIG),
                       help="YAML run configuration (default: shipped reference config)")
        p.add_argument("--seed", type=int, default=None, help="master seed (overrides run.seed)")
        p.add_argument("--workers", type=int, default=None, help=f"worker processes (or ${ENV_WORKERS})")
        p.add_argument("--out", default=None, help=f"output directory (or ${ENV_OUT}; default ./out)")
        p.add_argument("--format", choices=("csv", "binary"), default="csv",
                       help="table format: CSV text or structured .npy")
        p.add_argument("--n-target", type=int, default=None, help="triggered trajectories to collect")
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "ensemble":
            p.add_argument("--detuning-scan", action="store_true",
                           help="recompute post-trigger spectra over the probe_scan offsets")
            p.add_argument("--dump-trajectories", action="store_true",
                           help="write the replayed trajectory of every record")
        if name == "replay":
            p.add_argument("--records", help="records.jsonl written by ensemble or trap")
        if name == "transit":
            p.add_argument("--count", type=int, default=1, help="propagated candidates to dump")
        if name == "spectrum":
            p.add_argument("--g-mhz", type=float, default=None, help="standing-wave g/2pi (default g_max)")
            p.add_argument("--theta", type=float, default=0.0, help="coupling phase (rad)")
        if name == "fit-dielectric":
            p.add_argument("--nk-table", default=None, help="CSV with energy_eV, n, k columns")
            p.add_argument("--oscillators", type=int, default=7)
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = cfgmod.load_config(args.config)
    except cfgmod.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    seed = cfg["run"]["seed"] if args.seed is None else args.seed
    args.seed = seed
    out_dir = args.out or os.environ.get(ENV_OUT) or "out"
    writer = ArtifactWriter(out_dir, args.format)
    func = COMMANDS[args.command][0]
    start = time.perf_counter()
    code, result, error = EXIT_OK, None, None
    try:
        result = func(cfg, args, writer)
    except cfgmod.ConfigError as exc:
        code, error = EXIT_CONFIG, f"config error: {exc}"
    except de.TargetUnreachable as exc:
        code, error = EXIT_UNREACHABLE, f"target unreachable: {exc}"
    except NUMERIC_ERRORS as exc:
        code, error = EXIT_NUMERIC, f"numerical failure: {type(exc).__name__}: {exc}"
    except (ValueError, cq.CqedDomainError, am.AnalyticDomainError) as exc:
        code, error = EXIT_CONFIG, f"invalid parameters: {exc}"
    elapsed = time.perf_counter() - start
    meta = {
        "command": args.command,
        "config_hash": cfgmod.config_hash(cfg),
        "config": cfg,
        "seed": seed,
        "format": args.format,
        "backend": cfg["integrator"]["backend"] or K.default_backend(),
        "versions": _versions(),
        "exit_code": code,
        "error": error,
        "result": result,
        "artifacts": dict(sorted(writer.artifacts.items())),
    }
    (writer.out / "metadata.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True, default=_json_default) + "\n")
    (writer.out / "timings.json").write_text(json.dumps({"wall_seconds": elapsed}, indent=2) + "\n")
    if error:
        print(error, file=sys.stderr)
    return code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
