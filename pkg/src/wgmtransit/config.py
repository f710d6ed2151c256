"""Run configuration: YAML with unit-suffixed keys, validated against a fixed schema.

Every physical value carries its unit in the key name (``_mhz`` for omega/2pi
in MHz, ``_um``, ``_us``, ``_ns``, ``_uk``, ``_uw``, ``_k``). Unknown keys and
out-of-range values are rejected with the offending line number. The
effective configuration (defaults filled in) is what gets hashed and echoed
into run metadata.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from . import constants as const


class ConfigError(ValueError):
    """Schema violation; the message names the key path and line when known."""


REQUIRED = object()


@dataclass(frozen=True)
class Field:
    kind: str                      # "float", "int", "bool", "str"
    default: object = REQUIRED
    minimum: float | None = None
    exclusive_minimum: bool = False
    choices: tuple | None = None
    nullable: bool = False


def _f(default=REQUIRED, minimum=None, exclusive=False, nullable=False):
    return Field("float", default, minimum, exclusive, nullable=nullable)


def _i(default=REQUIRED, minimum=None, nullable=False):
    return Field("int", default, minimum, nullable=nullable)


def _b(default):
    return Field("bool", default)


def _s(default, choices=None, nullable=False):
    return Field("str", default, choices=choices, nullable=nullable)


SCHEMA = {
    "geometry": {
        "principal_diameter_um": _f(24.0, 0, True),
        "minor_diameter_um": _f(3.0, 0, True),
    },
    "mode": {
        "azimuthal_number": _i(118, 1),
        "wavelength_nm": _f(const.CS_D2_WAVELENGTH_NM, 0, True),
        "mode_width_rad": _f(0.35, 0, True),
        "angular_order": _i(0, 0),
        "g_max_mhz": _f(None, 0, True, nullable=True),
        "polarization_factor": _f(0.6, 0, True),
        "grid_file": _s(None, nullable=True),
    },
    "cqed": {
        "kappa_i_mhz": _f(REQUIRED, 0),
        "kappa_ex_mhz": _f(REQUIRED, 0),
        "h_mhz": _f(REQUIRED, 0),
        "gamma_mhz": _f(const.CS_D2_GAMMA_MHZ, 0, True),
        "delta_ca_mhz": _f(0.0),
        "probe_offset_mhz": _f(0.0),
        "input_flux_per_us": _f(15.0, 0),
        "solver": _s("linear", ("linear", "full")),
        "fock_cutoff": _i(3, 1),
    },
    "surface": {
        "enabled": _b(True),
        "shape": _s("cylinder", ("cylinder", "plane")),
        "temperature_k": _f(300.0, 0, True),
        "d_min_um": _f(1e-3, 0, True),
        "d_max_um": _f(20.0, 0, True),
        "points": _i(200, 16),
        "resonant_scale": _f(1.0, 0),
        "cache_dir": _s(None, nullable=True),
    },
    "forces": {
        "dipole": _b(True),
        "surface": _b(True),
        "shifts": _b(True),
        "velocity_correction": _b(True),
        "diffusion": _b(True),
    },
    "integrator": {
        "dt_us": _f(1e-3, 0, True),
        "backend": _s(None, ("numba", "numpy"), nullable=True),
    },
    "cloud": {
        "center_x_um": _f(0.0),
        "center_y_um": _f(0.0),
        "drop_height_um": _f(2040.0, 0, True),
        "sigma_x_um": _f(150.0, 0, True),
        "sigma_y_um": _f(150.0, 0, True),
        "sigma_z_um": _f(150.0, 0, True),
        "temperature_uk": _f(10.0, 0),
    },
    "jitter": {
        "sigma_kappa_ex_mhz": _f(3.0, 0),
        "sigma_omega_c_mhz": _f(1.5, 0),
        "noise_gate_per_us": _f(0.4, 0),
    },
    "trigger": {
        "threshold_counts": _i(4, 0),
        "window_ns": _f(500.0, 0, True),
        "bin_ns": _f(1.0, 0, True),
        "spectra_window_start_ns": _f(250.0, 0),
        "spectra_window_end_ns": _f(750.0, 0),
        "n_target": _i(400, 1),
        "transit_window_us": _f(50.0, 0, True),
        "max_samples": _i(4_000_000_000, 1),
        "band_um": _f(1.0, 0, True),
    },
    "probe_scan": {
        "start_mhz": _f(-80.0),
        "stop_mhz": _f(80.0),
        "count": _i(33, 1),
        "input_flux_per_us": _f(15.0, 0),
        "before_us": _f(1.0, 0),
        "after_us": _f(2.0, 0, True),
    },
    "trap": {
        "red_wavelength_nm": _f(898.0, 0, True),
        "red_azimuthal_number": _i(106, 1),
        "red_angular_order": _i(2, 0),
        "blue_wavelength_nm": _f(848.0, 0, True),
        "blue_azimuthal_number": _i(112, 1),
        "blue_angular_order": _i(0, 0),
        "red_power_uw": _f(50.0, 0),
        "blue_power_uw": _f(50.0, 0),
        "red_width_scale": _f(1.0, 0, True),
        "target_distance_nm": _f(150.0, 0, True),
        "target_depth_mk": _f(1.5, 0, True),
        "trigger_delay_us": _f(0.0, 0),
        "post_trigger_us": _f(50.0, 0, True),
        "capture_threshold_mhz": _f(5.0, 0),
        "capture_time_us": _f(10.0, 0),
    },
    "analytic": {
        "z0_um": _f(0.5, 0, True),
        "fall_speed_m_s": _f(0.2, 0, True),
        "g_floor": _f(1e-4, 0, True),
        "g_points": _i(240, 8),
        "theta_points": _i(64, 4),
    },
    "run": {
        "seed": _i(0, 0),
        "workers": _i(1, 1),
    },
}

DEFAULT_CONFIG = Path(__file__).parent / "data" / "paper_default.yaml"


def _key_lines(text: str) -> dict:
    """Map key paths (tuples) to 1-based line numbers."""
    lines = {}
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError:
        return lines

    def walk(node, path):
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                key = (*path, k.value)
                lines[key] = k.start_mark.line + 1
                walk(v, key)

    if root is not None:
        walk(root, ())
    return lines


def _where(lines, path) -> str:
    dotted = ".".join(path)
    line = lines.get(tuple(path))
    return f"line {line}: {dotted}" if line else dotted


def _coerce(value, spec: Field, where: str):
    if value is None:
        if spec.nullable:
            return None
        raise ConfigError(f"{where}: value may not be null")
    if spec.kind == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected true/false, got {value!r}")
        return value
    if spec.kind == "str":
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string, got {value!r}")
        if spec.choices and value not in spec.choices:
            raise ConfigError(f"{where}: expected one of {list(spec.choices)}, got {value!r}")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if spec.kind == "int":
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        value = int(value)
    else:
        value = float(value)
        if not np.isfinite(value):
            raise ConfigError(f"{where}: value must be finite")
    if spec.minimum is not None:
        bad = value <= spec.minimum if spec.exclusive_minimum else value < spec.minimum
        if bad:
            rel = ">" if spec.exclusive_minimum else ">="
            raise ConfigError(f"{where}: must be {rel} {spec.minimum}, got {value}")
    return value


def validate(raw: dict | None, lines: dict | None = None) -> dict:
    """Return the effective configuration with defaults applied."""
    lines = lines or {}
    raw = {} if raw is None else raw
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a mapping of sections")
    for section in raw:
        if section not in SCHEMA:
            raise ConfigError(f"{_where(lines, [str(section)])}: unknown section")
    out = {}
    for section, fields in SCHEMA.items():
        given = raw.get(section) or {}
        if not isinstance(given, dict):
            raise ConfigError(f"{_where(lines, [section])}: section must be a mapping")
        for key in given:
            if key not in fields:
                raise ConfigError(f"{_where(lines, [section, str(key)])}: unknown key")
        sec = {}
        for key, spec in fields.items():
            where = _where(lines, [section, key])
            if key in given:
                sec[key] = _coerce(given[key], spec, where)
            elif spec.default is REQUIRED:
                raise ConfigError(f"{where}: required key missing")
            else:
                sec[key] = copy.deepcopy(spec.default)
        out[section] = sec
    _cross_checks(out)
    return out


def _cross_checks(cfg: dict) -> None:
    for section, key in (("mode", "angular_order"), ("trap", "red_angular_order"),
                         ("trap", "blue_angular_order")):
        if cfg[section][key] % 2:
            raise ConfigError(f"{section}.{key}: angular order must be even")
    tr = cfg["trigger"]
    ratio = tr["window_ns"] / tr["bin_ns"]
    if abs(ratio - round(ratio)) > 1e-9:
        raise ConfigError("trigger.window_ns: must be a multiple of trigger.bin_ns")
    if tr["spectra_window_end_ns"] <= tr["spectra_window_start_ns"]:
        raise ConfigError("trigger.spectra_window_end_ns: must exceed the start")
    if cfg["surface"]["d_max_um"] <= cfg["surface"]["d_min_um"]:
        raise ConfigError("surface.d_max_um: must exceed surface.d_min_um")
    if cfg["trap"]["capture_time_us"] > cfg["trap"]["post_trigger_us"]:
        raise ConfigError("trap.capture_time_us: must not exceed trap.post_trigger_us")


def loads(text: str) -> dict:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}: " if mark is not None else ""
        raise ConfigError(f"{where}invalid YAML ({getattr(exc, 'problem', exc)})") from None
    return validate(raw, _key_lines(text))


def load_config(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return loads(path.read_text())


def defaults(required: dict | None = None) -> dict:
    """Effective config for a minimal input (cqed rates must be supplied)."""
    return validate(required or {"cqed": {"kappa_i_mhz": 0.0, "kappa_ex_mhz": 0.0, "h_mhz": 0.0}})


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def dumps(cfg: dict) -> str:
    return yaml.safe_dump(cfg, sort_keys=False)
