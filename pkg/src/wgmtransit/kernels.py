"""Trajectory kernels shared by the numba and pure-numpy backends.

The per-step physics is written once against a small set of helpers
(``sel``, ``to_index``) so that the same body runs on scalars inside numba
and on arrays (one entry per trajectory) in the numpy backend. ``build(jit)``
returns a namespace with the evaluation function and a driver.

Layout
------
params : float64 array indexed by the ``P_*`` constants (shape (NP,) for
    numba, (NP, batch) for numpy).
toggles : int64 array indexed by the ``TG_*`` constants, shared by a batch.
tables : float64 array (6, N) with (values, slopes) of the ground potential,
    excited potential and isotropic decay ratio on a uniform ln-d grid.
grids : three (rho_axis, z_axis, values) triples for probe, red and blue
    modes; empty arrays select the analytic profile.
Recorded columns are given by the ``REC_*`` constants.
"""

from __future__ import annotations

import os
from types import SimpleNamespace

import numpy as np

_names = [
    "R_MAJOR", "R_MINOR", "M_AZ", "G_TW_MAX", "K_WAVE", "HBAR_M", "G_ACC",
    "KAPPA_I", "KAPPA_EX", "H", "GAMMA0",
    "DELTA_CP", "DELTA_AP0", "DRIVE", "P_IN",
    "DELTA_CP_POST", "DELTA_AP0_POST", "DRIVE_POST", "P_IN_POST", "T_SWITCH", "T_TRAP_ON",
    "TAB_X0", "TAB_DX",
    "PROBE_LAM", "PROBE_WIDTH", "PROBE_ORDER",
    "RED_LAM", "RED_WIDTH", "RED_ORDER", "RED_COEF",
    "BLUE_LAM", "BLUE_WIDTH", "BLUE_ORDER", "BLUE_COEF",
]
for _i, _n in enumerate(_names):
    globals()["P_" + _n] = _i
NP = len(_names)
PARAM_NAMES = tuple(_names)

_toggles = ["DIPOLE", "SURFACE", "SHIFTS", "TRAP", "VELCORR", "DIFFUSION"]
for _i, _n in enumerate(_toggles):
    globals()["TG_" + _n] = _i
NTOG = len(_toggles)
TOGGLE_NAMES = tuple(t.lower() for t in _toggles)

_rec = ["T", "X", "Y", "Z", "VX", "VY", "VZ", "TRANS", "REFL", "G", "THETA", "D", "CRASHED"]
for _i, _n in enumerate(_rec):
    globals()["REC_" + _n] = _i
NREC = len(_rec)
RECORD_COLUMNS = ("t_us", "x_um", "y_um", "z_um", "vx_um_us", "vy_um_us", "vz_um_us",
                  "transmission", "reflection", "g_MHz_rad", "theta_rad", "d_um", "crashed")

ENV_FLAG = "WGMTRANSIT_NUMBA"


def default_backend() -> str:
    """'numba' unless WGMTRANSIT_NUMBA is set to 0/false/no."""
    flag = os.environ.get(ENV_FLAG, "1").strip().lower()
    return "numpy" if flag in ("0", "false", "no", "off") else "numba"


def _make(jit: bool):
    if jit:
        import numba
        compile_ = numba.njit(cache=True, fastmath=False)
    else:
        compile_ = lambda f: f

    if jit:
        def sel(c, a, b):
            return a if c else b

        def to_index(s, n):
            i = int(np.floor(s))
            return min(max(i, 0), n - 2)

        def searchsorted(axis, v):
            return np.searchsorted(axis, v, side="right") - 1

        def anyv(c):
            return c

        def first(v):
            return v
    else:
        def sel(c, a, b):
            return np.where(c, a, b)

        def to_index(s, n):
            return np.clip(np.floor(s).astype(np.int64), 0, n - 2)

        def searchsorted(axis, v):
            return np.searchsorted(axis, v, side="right") - 1

        def anyv(c):
            return np.any(c)

        def first(v):
            # mode shape parameters are shared across a batch
            return np.ravel(v)[0]

    sel = compile_(sel)
    first = compile_(first)
    anyv = compile_(anyv)
    to_index = compile_(to_index)
    searchsorted = compile_(searchsorted)

    @compile_
    def hermite_gauss(psi, width, order):
        """Angular factor H_n(x) exp(-x^2/2)/H_n(0) and its psi derivative."""
        x = np.sqrt(2.0) * psi / width
        gauss = np.exp(-0.5 * x * x)
        n = int(first(order))
        h_prev = 0.0 * x
        h_cur = 1.0 + 0.0 * x
        norm_prev = 0.0
        norm_cur = 1.0
        for k in range(n):
            h_next = 2.0 * x * h_cur - 2.0 * k * h_prev
            norm_next = -2.0 * k * norm_prev
            h_prev = h_cur
            h_cur = h_next
            norm_prev = norm_cur
            norm_cur = norm_next
        dh = 2.0 * n * h_prev
        val = h_cur * gauss / norm_cur
        dval = (dh - x * h_cur) * gauss / norm_cur * np.sqrt(2.0) / width
        return val, dval

    @compile_
    def bilinear(rho_axis, z_axis, values, rho, z):
        nr = rho_axis.shape[0]
        nz = z_axis.shape[0]
        j = np.minimum(np.maximum(searchsorted(rho_axis, rho), 0), nr - 2)
        i = np.minimum(np.maximum(searchsorted(z_axis, z), 0), nz - 2)
        r0 = rho_axis[j]
        r1 = rho_axis[j + 1]
        z0 = z_axis[i]
        z1 = z_axis[i + 1]
        tr = (rho - r0) / (r1 - r0)
        tz = (z - z0) / (z1 - z0)
        inside = (rho >= rho_axis[0]) & (rho <= rho_axis[nr - 1]) & (z >= z_axis[0]) & (z <= z_axis[nz - 1])
        v = ((1 - tr) * (1 - tz) * values[i, j] + tr * (1 - tz) * values[i, j + 1]
             + (1 - tr) * tz * values[i + 1, j] + tr * tz * values[i + 1, j + 1])
        return sel(inside, v, 0.0 * v)

    @compile_
    def mode_profile(rho, z, r_major, r_minor, lam, width, order, rho_axis, z_axis, values):
        """(f, df/drho, df/dz) from the analytic form or an imported grid."""
        if values.shape[0] > 0:
            step = 1e-3
            f = bilinear(rho_axis, z_axis, values, rho, z)
            dfr = (bilinear(rho_axis, z_axis, values, rho + step, z)
                   - bilinear(rho_axis, z_axis, values, rho - step, z)) / (2 * step)
            dfz = (bilinear(rho_axis, z_axis, values, rho, z + step)
                   - bilinear(rho_axis, z_axis, values, rho, z - step)) / (2 * step)
            return f, dfr, dfz
        u = rho - r_major
        rc = np.sqrt(u * u + z * z)
        d = rc - r_minor
        psi = np.arctan2(z, u)
        radial = np.exp(-d / lam)
        ang, dang = hermite_gauss(psi, width, order)
        outside = d >= 0.0
        zero = 0.0 * d
        f = sel(outside, radial * ang, zero)
        dfr = sel(outside, radial * (-ang / lam * u / rc - dang * z / (rc * rc)), zero)
        dfz = sel(outside, radial * (-ang / lam * z / rc + dang * u / (rc * rc)), zero)
        return f, dfr, dfz

    @compile_
    def table_eval(vals, slopes, x0, dx, power, d):
        """Hermite table of y(ln d), returns (Q, dQ/dd) with Q = y d^-power."""
        n = vals.shape[0]
        x = np.log(d)
        s = (x - x0) / dx
        i = to_index(s, n)
        t = s - i
        y0 = vals[i]
        y1 = vals[i + 1]
        m0 = slopes[i] * dx
        m1 = slopes[i + 1] * dx
        t2 = t * t
        t3 = t2 * t
        y = (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * m1
        dy = ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * m0
              + (-6 * t2 + 6 * t) * y1 + (3 * t2 - 2 * t) * m1) / dx
        q = y * np.exp(-power * x)
        dq = (dy - power * y) * np.exp(-(power + 1.0) * x)
        return q, dq

    @compile_
    def solve3(m00, m01, m02, m10, m11, m12, m20, m21, m22, r0, r1, r2):
        """Cramer's rule for a complex 3x3 system."""
        c00 = m11 * m22 - m12 * m21
        c01 = m12 * m20 - m10 * m22
        c02 = m10 * m21 - m11 * m20
        det = m00 * c00 + m01 * c01 + m02 * c02
        x0 = (r0 * c00 + r1 * (m02 * m21 - m01 * m22) + r2 * (m01 * m12 - m02 * m11)) / det
        x1 = (r0 * c01 + r1 * (m00 * m22 - m02 * m20) + r2 * (m02 * m10 - m00 * m12)) / det
        x2 = (r0 * c02 + r1 * (m01 * m20 - m00 * m21) + r2 * (m00 * m11 - m01 * m10)) / det
        return x0, x1, x2

    @compile_
    def evaluate(x, y, z, vx, vy, vz, t, crashed, p, tog, tables, g0, g1, g2):
        """Accelerations, diffusion variances per unit time, and observables.

        Returns (ax, ay, az, sx, sy, sz, T, R, g_abs_sw, theta, d); s_i are
        (hbar/m)^2 * 2 D_ii / hbar^2, so the velocity-kick variance is s_i dt.
        """
        r_major = p[P_R_MAJOR]
        r_minor = p[P_R_MINOR]
        rho = np.sqrt(x * x + y * y)
        phi = np.arctan2(y, x)
        u = rho - r_major
        rc = np.sqrt(u * u + z * z)
        d = rc - r_minor
        # outward surface normal, Cartesian
        nr = u / rc
        nx = nr * x / rho
        ny = nr * y / rho
        nz = z / rc

        post = t >= p[P_T_SWITCH]
        delta_cp = sel(post, p[P_DELTA_CP_POST], p[P_DELTA_CP])
        delta_ap0 = sel(post, p[P_DELTA_AP0_POST], p[P_DELTA_AP0])
        drive = sel(post, p[P_DRIVE_POST], p[P_DRIVE])
        p_in = sel(post, p[P_P_IN_POST], p[P_P_IN])

        # probe-mode coupling and its Cartesian gradient
        f, dfr, dfz = mode_profile(rho, z, r_major, r_minor, p[P_PROBE_LAM], p[P_PROBE_WIDTH],
                                   p[P_PROBE_ORDER], g0[0], g0[1], g0[2])
        f = sel(crashed, 0.0 * f, f)
        dfr = sel(crashed, 0.0 * dfr, dfr)
        dfz = sel(crashed, 0.0 * dfz, dfz)
        m = p[P_M_AZ]
        theta = m * phi
        phase = np.cos(theta) + 1j * np.sin(theta)
        gtw = p[P_G_TW_MAX]
        g = gtw * f * phase
        dphix = -y / (rho * rho)
        dphiy = x / (rho * rho)
        gx = gtw * phase * (dfr * x / rho + 1j * m * f * dphix)
        gy = gtw * phase * (dfr * y / rho + 1j * m * f * dphiy)
        gz = gtw * phase * dfz

        # surface tables
        n_tab = tables.shape[1]
        x0 = p[P_TAB_X0]
        dx = p[P_TAB_DX]
        dmin = np.exp(x0)
        dmax = np.exp(x0 + dx * (n_tab - 1))
        dc = np.minimum(np.maximum(d, dmin), dmax)
        ug, dug = table_eval(tables[0], tables[1], x0, dx, 3.0, dc)
        ue, due = table_eval(tables[2], tables[3], x0, dx, 3.0, dc)
        gr, dgr = table_eval(tables[4], tables[5], x0, dx, 0.0, dc)
        inside = (d >= dmin) & (d <= dmax)
        dug = sel(inside, dug, 0.0 * dug)
        due = sel(inside, due, 0.0 * due)
        dgr = sel(inside, dgr, 0.0 * dgr)
        shifts = tog[TG_SHIFTS] != 0
        gamma0 = p[P_GAMMA0]
        gamma = sel(shifts, gamma0 * gr, gamma0 + 0.0 * gr)
        dgamma = sel(shifts, gamma0 * dgr, 0.0 * dgr)
        delta_a = sel(shifts, ue - ug, 0.0 * ug)
        ddelta = sel(shifts, due - dug, 0.0 * dug)

        kappa_ex = p[P_KAPPA_EX]
        kappa = p[P_KAPPA_I] + kappa_ex
        hh = p[P_H]
        big_a = kappa + 1j * delta_cp
        big_g = gamma + 1j * (delta_ap0 + delta_a)
        gc = np.conj(g)
        # drift matrix rows (-A, -ih, -ig*), (-ih, -A, -ig), (-ig, -ig*, -G)
        m00 = -big_a
        m01 = -1j * hh
        m02 = -1j * gc
        m10 = -1j * hh
        m11 = -big_a
        m12 = -1j * g
        m20 = -1j * g
        m21 = -1j * gc
        m22 = -big_g
        zc = 0.0j * f
        a, b, s = solve3(m00, m01, m02, m10, m11, m12, m20, m21, m22,
                         1j * drive + zc, zc, zc)

        root = np.sqrt(2.0 * kappa_ex)
        a_in = -1j * drive / root
        has_in = p_in > 0
        safe_pin = sel(has_in, p_in, 1.0 + 0.0 * p_in)
        trans = sel(has_in, np.abs(-a_in + root * a) ** 2 / safe_pin, 0.0 * f)
        refl = sel(has_in, 2.0 * kappa_ex * np.abs(b) ** 2 / safe_pin, 0.0 * f)

        hm = p[P_HBAR_M]
        fx = 0.0 * f
        fy = 0.0 * f
        fz = 0.0 * f
        if tog[TG_DIPOLE] != 0:
            w = np.conj(a) * s + np.conj(s) * b
            fx = fx - 2.0 * np.real(np.conj(gx) * w)
            fy = fy - 2.0 * np.real(np.conj(gy) * w)
            fz = fz - 2.0 * np.real(np.conj(gz) * w)

        # every gradient term carries a factor g or dg; skip far from the mode
        coupled = anyv(f > 1e-12)
        need_grad = (tog[TG_VELCORR] != 0 or tog[TG_DIFFUSION] != 0) and coupled
        sx = 0.0 * f
        sy = 0.0 * f
        sz = 0.0 * f
        if need_grad:
            # d O0/dx_i = M^-1 [i dg* s, i dg s, i dg a + i dg* b + dG s]
            dgx = dgamma * nx + 1j * ddelta * nx
            dgy = dgamma * ny + 1j * ddelta * ny
            dgz = dgamma * nz + 1j * ddelta * nz
            ax_, bx_, sx_ = solve3(m00, m01, m02, m10, m11, m12, m20, m21, m22,
                                   1j * np.conj(gx) * s, 1j * gx * s,
                                   1j * gx * a + 1j * np.conj(gx) * b + dgx * s)
            ay_, by_, sy_ = solve3(m00, m01, m02, m10, m11, m12, m20, m21, m22,
                                   1j * np.conj(gy) * s, 1j * gy * s,
                                   1j * gy * a + 1j * np.conj(gy) * b + dgy * s)
            az_, bz_, sz_ = solve3(m00, m01, m02, m10, m11, m12, m20, m21, m22,
                                   1j * np.conj(gz) * s, 1j * gz * s,
                                   1j * gz * a + 1j * np.conj(gz) * b + dgz * s)
            if tog[TG_VELCORR] != 0 and tog[TG_DIPOLE] != 0:
                ra = vx * ax_ + vy * ay_ + vz * az_
                rb = vx * bx_ + vy * by_ + vz * bz_
                rs = vx * sx_ + vy * sy_ + vz * sz_
                a1, b1, s1 = solve3(m00, m01, m02, m10, m11, m12, m20, m21, m22, ra, rb, rs)
                w1 = np.conj(a) * s1 + np.conj(a1) * s + np.conj(s) * b1 + np.conj(s1) * b
                fx = fx - 2.0 * np.real(np.conj(gx) * w1)
                fy = fy - 2.0 * np.real(np.conj(gy) * w1)
                fz = fz - 2.0 * np.real(np.conj(gz) * w1)
            if tog[TG_DIFFUSION] != 0:
                k = p[P_K_WAVE]
                spont = k * k * 2.0 * gamma * np.abs(s) ** 2
                sx = hm * hm * (spont + 2.0 * gamma * np.abs(sx_) ** 2
                                + 2.0 * kappa * (np.abs(ax_) ** 2 + np.abs(bx_) ** 2))
                sy = hm * hm * (spont + 2.0 * gamma * np.abs(sy_) ** 2
                                + 2.0 * kappa * (np.abs(ay_) ** 2 + np.abs(by_) ** 2))
                sz = hm * hm * (spont + 2.0 * gamma * np.abs(sz_) ** 2
                                + 2.0 * kappa * (np.abs(az_) ** 2 + np.abs(bz_) ** 2))

        if tog[TG_SURFACE] != 0:
            pe = np.minimum(np.maximum(np.abs(s) ** 2, 0.0), 1.0)
            du = (1.0 - pe) * dug + pe * due
            fx = fx - du * nx
            fy = fy - du * ny
            fz = fz - du * nz

        if tog[TG_TRAP] != 0:
            on = t >= p[P_T_TRAP_ON]
            fr, frr, frz = mode_profile(rho, z, r_major, r_minor, p[P_RED_LAM], p[P_RED_WIDTH],
                                        p[P_RED_ORDER], g1[0], g1[1], g1[2])
            fb, fbr, fbz = mode_profile(rho, z, r_major, r_minor, p[P_BLUE_LAM], p[P_BLUE_WIDTH],
                                        p[P_BLUE_ORDER], g2[0], g2[1], g2[2])
            dur = 2.0 * (p[P_RED_COEF] * fr * frr + p[P_BLUE_COEF] * fb * fbr)
            duz = 2.0 * (p[P_RED_COEF] * fr * frz + p[P_BLUE_COEF] * fb * fbz)
            fx = fx - sel(on, dur * x / rho, 0.0 * dur)
            fy = fy - sel(on, dur * y / rho, 0.0 * dur)
            fz = fz - sel(on, duz, 0.0 * duz)

        ax = sel(crashed, 0.0 * fx, hm * fx)
        ay = sel(crashed, 0.0 * fy, hm * fy)
        az = sel(crashed, 0.0 * fz, hm * fz - p[P_G_ACC])
        sx = sel(crashed, 0.0 * sx, sx)
        sy = sel(crashed, 0.0 * sy, sy)
        sz = sel(crashed, 0.0 * sz, sz)
        g_sw = np.sqrt(2.0) * gtw * f
        theta_w = np.mod(theta, 2.0 * np.pi)
        return ax, ay, az, sx, sy, sz, trans, refl, g_sw, theta_w, d

    @compile_
    def project_to_surface(x, y, z, r_major, r_minor):
        rho = np.sqrt(x * x + y * y)
        u = rho - r_major
        rc = np.sqrt(u * u + z * z)
        scale = r_minor / rc
        rho_new = r_major + u * scale
        return x * rho_new / rho, y * rho_new / rho, z * scale

    return SimpleNamespace(sel=sel, hermite_gauss=hermite_gauss, mode_profile=mode_profile,
                           table_eval=table_eval, solve3=solve3, evaluate=evaluate,
                           project_to_surface=project_to_surface, compile=compile_)


def _numba_driver(ns):
    import numba

    evaluate = ns.evaluate
    project = ns.project_to_surface

    @numba.njit(cache=True)
    def run_single(state, t0, dt, n_steps, p, tog, tables, g0, g1, g2, noise, crashed0):
        rec = np.empty((n_steps, NREC))
        x, y, z, vx, vy, vz = state[0], state[1], state[2], state[3], state[4], state[5]
        crashed = crashed0
        crash_step = -1
        for i in range(n_steps):
            t = t0 + i * dt
            ax, ay, az, sx, sy, sz, tr, rf, gsw, th, d = evaluate(
                x, y, z, vx, vy, vz, t, crashed, p, tog, tables, g0, g1, g2)
            rec[i, REC_T] = t
            rec[i, REC_X] = x
            rec[i, REC_Y] = y
            rec[i, REC_Z] = z
            rec[i, REC_VX] = vx
            rec[i, REC_VY] = vy
            rec[i, REC_VZ] = vz
            rec[i, REC_TRANS] = tr
            rec[i, REC_REFL] = rf
            rec[i, REC_G] = gsw
            rec[i, REC_THETA] = th
            rec[i, REC_D] = d
            rec[i, REC_CRASHED] = 1.0 if crashed else 0.0
            if crashed:
                continue
            vx = vx + ax * dt + np.sqrt(sx * dt) * noise[i, 0]
            vy = vy + ay * dt + np.sqrt(sy * dt) * noise[i, 1]
            vz = vz + az * dt + np.sqrt(sz * dt) * noise[i, 2]
            x = x + vx * dt
            y = y + vy * dt
            z = z + vz * dt
            rho = np.sqrt(x * x + y * y)
            u = rho - p[P_R_MAJOR]
            if np.sqrt(u * u + z * z) - p[P_R_MINOR] < 0.0:
                crashed = True
                crash_step = i + 1
                x, y, z = project(x, y, z, p[P_R_MAJOR], p[P_R_MINOR])
                vx = 0.0
                vy = 0.0
                vz = 0.0
        final = np.array([x, y, z, vx, vy, vz])
        return rec, final, crashed, crash_step

    return run_single


def _numpy_driver(ns):
    evaluate = ns.evaluate
    project = ns.project_to_surface

    def run_batch(states, t0, dt, n_steps, params, tog, tables, g0, g1, g2, noise, crashed0):
        """states (B, 6), params (NP, B), noise (B, n, 3) -> rec (B, n, NREC), ..."""
        batch = states.shape[0]
        x, y, z, vx, vy, vz = (states[:, k].astype(float).copy() for k in range(6))
        crashed = np.asarray(crashed0, bool).copy()
        crash_step = np.full(batch, -1, dtype=np.int64)
        rec = np.empty((batch, n_steps, NREC))
        for i in range(n_steps):
            t = t0 + i * dt
            ax, ay, az, sx, sy, sz, tr, rf, gsw, th, d = evaluate(
                x, y, z, vx, vy, vz, t, crashed, params, tog, tables, g0, g1, g2)
            rec[:, i, REC_T] = t
            rec[:, i, REC_X] = x
            rec[:, i, REC_Y] = y
            rec[:, i, REC_Z] = z
            rec[:, i, REC_VX] = vx
            rec[:, i, REC_VY] = vy
            rec[:, i, REC_VZ] = vz
            rec[:, i, REC_TRANS] = tr
            rec[:, i, REC_REFL] = rf
            rec[:, i, REC_G] = gsw
            rec[:, i, REC_THETA] = th
            rec[:, i, REC_D] = d
            rec[:, i, REC_CRASHED] = crashed
            live = ~crashed
            nvx = vx + ax * dt + np.sqrt(sx * dt) * noise[:, i, 0]
            nvy = vy + ay * dt + np.sqrt(sy * dt) * noise[:, i, 1]
            nvz = vz + az * dt + np.sqrt(sz * dt) * noise[:, i, 2]
            vx = np.where(live, nvx, vx)
            vy = np.where(live, nvy, vy)
            vz = np.where(live, nvz, vz)
            x = np.where(live, x + vx * dt, x)
            y = np.where(live, y + vy * dt, y)
            z = np.where(live, z + vz * dt, z)
            rho = np.sqrt(x * x + y * y)
            u = rho - params[P_R_MAJOR]
            hit = live & (np.sqrt(u * u + z * z) - params[P_R_MINOR] < 0.0)
            if hit.any():
                px, py, pz = project(x, y, z, params[P_R_MAJOR], params[P_R_MINOR])
                x = np.where(hit, px, x)
                y = np.where(hit, py, y)
                z = np.where(hit, pz, z)
                vx = np.where(hit, 0.0, vx)
                vy = np.where(hit, 0.0, vy)
                vz = np.where(hit, 0.0, vz)
                crash_step = np.where(hit, i + 1, crash_step)
                crashed = crashed | hit
        final = np.stack([x, y, z, vx, vy, vz], axis=1)
        return rec, final, crashed, crash_step

    return run_batch


_CACHE = {}


def get_backend(name: str | None = None) -> SimpleNamespace:
    """Return the physics namespace plus a ``run`` driver for 'numba' or 'numpy'."""
    name = name or default_backend()
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name not in _CACHE:
        ns = _make(jit=(name == "numba"))
        ns.name = name
        ns.run = _numba_driver(ns) if name == "numba" else _numpy_driver(ns)
        _CACHE[name] = ns
    return _CACHE[name]


EMPTY_GRID = (np.zeros(0), np.zeros(0), np.zeros((0, 0)))
