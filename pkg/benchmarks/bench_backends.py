#!/usr/bin/env python3
"""Numba kernel versus the vectorised numpy fallback.

Propagates the same batch of atoms (full force model near the resonator)
with both backends, reports wall time per trajectory-step and the largest
position difference between them.

    python3 benchmarks/bench_backends.py --batch 8 --steps 2000
"""

import argparse
import time

import numpy as np

from wgmtransit import casimir_polder as cp
from wgmtransit import constants as const
from wgmtransit import forces_dynamics as fd
from wgmtransit import kernels as K
from wgmtransit.geometry_modes import ModeModel


def make_inputs(batch: int, steps: int, seed: int = 1):
    mode = ModeModel(g_max=const.mhz_to_rad_us(100.0))
    surface = cp.build_surface_model(cp.SurfaceGeometry.cylinder(mode.geometry.minor_radius_um))
    setup = fd.TransitSetup(mode, fd.CavitySettings.from_mhz(13, 17, 11), surface=surface)
    rng = np.random.default_rng(seed)
    rim = mode.geometry.principal_diameter_um / 2
    states = np.zeros((batch, 6))
    states[:, 0] = rim + rng.uniform(0.05, 0.4, batch)
    states[:, 2] = rng.uniform(0.2, 0.6, batch)
    states[:, 5] = -0.2
    noises = [rng.standard_normal((steps, 3)) for _ in range(batch)]
    params = [fd.pack_params(setup) for _ in range(batch)]
    return setup, states, noises, params


def run(backend: str, setup, states, noises, params, steps: int):
    t0 = np.zeros(len(states))
    start = time.perf_counter()
    trajs = fd.propagate_batch(setup, list(states), t0, steps, noises, params, backend,
                               batch=len(states))
    return trajs, time.perf_counter() - start


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--batch", type=int, default=8)
    ap.add_argument("--steps", type=int, default=2000)
    args = ap.parse_args()

    setup, states, noises, params = make_inputs(args.batch, args.steps)
    # warm-up: JIT compilation (or cache load) is not timed
    t0 = time.perf_counter()
    run("numba", setup, states[:1], [noises[0][:10]], params[:1], 10)
    print(f"numba warm-up: {time.perf_counter() - t0:.2f} s")

    nb, t_nb = run("numba", setup, states, noises, params, args.steps)
    npy, t_np = run("numpy", setup, states, noises, params, args.steps)
    work = args.batch * args.steps
    diff = max(np.abs(a.record[:, K.REC_X:K.REC_Z + 1] - b.record[:, K.REC_X:K.REC_Z + 1]).max()
               for a, b in zip(nb, npy))
    print(f"{'backend':>8}  {'total (s)':>10}  {'us/step':>8}")
    print(f"{'numba':>8}  {t_nb:>10.3f}  {1e6 * t_nb / work:>8.2f}")
    print(f"{'numpy':>8}  {t_np:>10.3f}  {1e6 * t_np / work:>8.2f}")
    print(f"speed-up {t_np / t_nb:.1f}x, max |position difference| {diff:.2e} um")


if __name__ == "__main__":
    main()
