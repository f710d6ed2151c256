import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from wgmtransit import casimir_polder as cp
from wgmtransit import config as cfgmod
from wgmtransit import constants as const
from wgmtransit import forces_dynamics as fd
from wgmtransit.geometry_modes import ModeModel, ToroidGeometry

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def default_cfg():
    return cfgmod.load_config(cfgmod.DEFAULT_CONFIG)


@pytest.fixture(scope="session")
def geometry():
    return ToroidGeometry(24.0, 3.0)


@pytest.fixture(scope="session")
def mode(geometry):
    return ModeModel(geometry, g_max=const.mhz_to_rad_us(100.0))


@pytest.fixture(scope="session")
def plane_surface():
    return cp.build_surface_model(cp.SurfaceGeometry.plane())


@pytest.fixture(scope="session")
def cylinder_surface(geometry):
    return cp.build_surface_model(cp.SurfaceGeometry.cylinder(geometry.minor_radius_um))


@pytest.fixture(scope="session")
def cavity():
    return fd.CavitySettings.from_mhz(13.0, 17.0, 11.0)


@pytest.fixture(scope="session")
def full_setup(mode, cavity, cylinder_surface):
    return fd.TransitSetup(mode, cavity, surface=cylinder_surface)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_cfg(default_cfg):
    """Default configuration shrunk for quick CLI runs."""
    cfg = {k: dict(v) for k, v in default_cfg.items()}
    cfg["trigger"]["n_target"] = 3
    cfg["probe_scan"]["count"] = 3
    return cfg


def rim_state(geometry, gap_um, z_um=0.0, vz=-0.2, phi=0.0):
    """Cartesian state at ``gap_um`` outside the outer equator."""
    rho = geometry.principal_diameter_um / 2 + gap_um
    return np.array([rho * np.cos(phi), rho * np.sin(phi), z_um, 0.0, 0.0, vz])


@pytest.fixture(scope="session")
def make_rim_state():
    return rim_state


def pytest_configure(config):
    config.acceptance_lines = {}


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per criterion for the terminal summary."""
    def record(number: int, passed: bool, detail: str):
        request.config.acceptance_lines[number] = (passed, detail)
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'} | {detail}")
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(lines):
        passed, detail = lines[number]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d}: {detail}")
