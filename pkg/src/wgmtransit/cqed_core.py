"""Two counter-propagating cavity modes coupled to a two-level atom.

Linearized steady states (atom treated as a weakly excited oscillator), the
drift-matrix eigenvalues and a truncated-Fock master-equation solver. Rates
and detunings are angular frequencies in rad/us; fluxes are counts/us.

Sign conventions: Delta_cp = omega_c - omega_p, Delta_ap = omega_a - omega_p,
as they appear in the rotating-frame Hamiltonian. The drive enters as
-i eps_p in d<a>/dt with eps_p real and positive, so that the input field is
a_in = -i eps_p / sqrt(2 kappa_ex) and P_in = eps_p^2 / (2 kappa_ex).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu


class CqedDomainError(ValueError):
    """Singular or unphysical cavity parameters."""


class SteadyStateError(RuntimeError):
    """The master-equation steady state could not be obtained."""


class Solver(str, Enum):
    LINEAR = "linear"
    FULL = "full"


@dataclass(frozen=True)
class CqedParams:
    """Cavity, atom and drive parameters (rad/us unless noted).

    ``input_flux`` is P_in in counts/us; the drive amplitude is derived from it.
    """

    kappa_i: float
    kappa_ex: float
    h: float
    gamma: float
    delta_cp: float = 0.0
    delta_ap: float = 0.0
    g_tw: complex = 0.0
    input_flux: float = 15.0

    def __post_init__(self):
        for name in ("kappa_i", "kappa_ex", "gamma", "input_flux"):
            if getattr(self, name) < 0:
                raise CqedDomainError(f"{name} must be non-negative")
        if np.iscomplexobj(self.h) and np.imag(self.h) != 0:
            raise CqedDomainError("h must be real")

    @property
    def kappa(self) -> float:
        return self.kappa_i + self.kappa_ex

    @property
    def drive(self) -> float:
        """eps_p in rad/us."""
        return float(np.sqrt(2.0 * self.kappa_ex * self.input_flux))

    def with_coupling(self, g_tw) -> "CqedParams":
        return replace(self, g_tw=complex(g_tw))

    @classmethod
    def from_mhz(cls, kappa_i, kappa_ex, h, gamma, delta_cp=0.0, delta_ap=0.0,
                 g_tw=0.0, input_flux=15.0):
        """Build from cyclic-MHz values (each multiplied by 2 pi)."""
        w = 2.0 * np.pi
        return cls(kappa_i * w, kappa_ex * w, h * w, gamma * w, delta_cp * w,
                   delta_ap * w, complex(g_tw) * w, input_flux)


@dataclass(frozen=True)
class CqedState:
    """Steady-state amplitudes and output ratios."""

    a: complex
    b: complex
    sigma: complex
    transmission: float
    reflection: float
    excited_population: float
    photon_number_a: float = float("nan")
    photon_number_b: float = float("nan")
    zero_input: bool = False
    truncation_converged: bool = True
    fock_cutoff: int | None = None


def critical_coupling(kappa_i: float, h: float) -> float:
    """kappa_ex at which the bare cavity transmits nothing on resonance."""
    return float(np.hypot(kappa_i, h))


def linear_amplitudes(kappa, delta_cp, gamma, delta_ap, h, g, drive):
    """Closed-form steady-state (a, b, sigma); works elementwise on arrays."""
    A = kappa + 1j * delta_cp
    G = gamma + 1j * delta_ap
    gc = np.conj(g)
    g2 = g * gc
    cross = A * G + g2
    den = (1j * h * G + gc * gc) * (1j * h * G + g * g) - cross * cross
    a = 1j * drive * G * cross / den
    b = -(1j * h * G + g * g) / cross * a
    sigma = -1j * (g * a + gc * b) / G
    return a, b, sigma


def output_ratios(a, b, kappa_ex, drive):
    """(T, R) from intracavity amplitudes under the factorisation <a+a> = |<a>|^2."""
    root = np.sqrt(2.0 * kappa_ex)
    a_in = -1j * drive / root
    p_in = drive * drive / (2.0 * kappa_ex)
    a_out = -a_in + root * a
    b_out = root * b
    return np.abs(a_out) ** 2 / p_in, np.abs(b_out) ** 2 / p_in


def drift_matrix(params: CqedParams) -> np.ndarray:
    """3x3 matrix M of d/dt (a, b, sigma) = M (a, b, sigma) + drive."""
    A = params.kappa + 1j * params.delta_cp
    G = params.gamma + 1j * params.delta_ap
    g = complex(params.g_tw)
    gc = np.conj(g)
    ih = 1j * params.h
    return np.array([[-A, -ih, -1j * gc],
                     [-ih, -A, -1j * g],
                     [-1j * g, -1j * gc, -G]], dtype=complex)


def steady_state_linear(params: CqedParams) -> CqedState:
    """Analytic linearized steady state with T and R from the input-output relations."""
    if params.kappa == 0 and params.delta_cp == 0 and params.delta_ap == 0 \
            and params.g_tw == 0 and params.h == 0:
        raise CqedDomainError("singular cavity system (no loss, no detuning, no coupling)")
    if params.input_flux == 0 or params.kappa_ex == 0:
        return CqedState(0j, 0j, 0j, 0.0, 0.0, 0.0, 0.0, 0.0, zero_input=True)
    a, b, s = linear_amplitudes(params.kappa, params.delta_cp, params.gamma,
                                params.delta_ap, params.h, complex(params.g_tw), params.drive)
    if not (np.isfinite(a) and np.isfinite(b) and np.isfinite(s)):
        raise CqedDomainError("singular drift matrix")
    t, r = output_ratios(a, b, params.kappa_ex, params.drive)
    return CqedState(complex(a), complex(b), complex(s), float(t), float(r),
                     float(abs(s) ** 2), float(abs(a) ** 2), float(abs(b) ** 2))


def system_eigenvalues(params: CqedParams) -> np.ndarray:
    """Eigenvalues of the drift matrix, sorted by descending imaginary part.

    Ties (equal imaginary part to 1e-12 relative) are broken by descending
    real part.
    """
    lam = np.linalg.eigvals(drift_matrix(params))
    scale = max(1.0, float(np.max(np.abs(lam))))
    key_im = np.round(lam.imag / scale, 12)
    order = np.lexsort((-lam.real, -key_im))
    return lam[order]


# ---------------------------------------------------------------------------
# truncated-Fock master equation


def _operators(cutoff: int):
    n = cutoff + 1
    ann = sp.diags(np.sqrt(np.arange(1, n, dtype=float)), 1, format="csr")
    eye_f = sp.identity(n, format="csr")
    sm = sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))   # |g><e|, basis (g, e)
    eye_a = sp.identity(2, format="csr")
    a = sp.kron(sp.kron(eye_a, ann), eye_f, format="csr")
    b = sp.kron(sp.kron(eye_a, eye_f), ann, format="csr")
    s = sp.kron(sp.kron(sm, eye_f), eye_f, format="csr")
    return a, b, s


def _liouvillian(H, collapse):
    """Column-stacking superoperator: vec(A rho B) = (B^T kron A) vec(rho)."""
    dim = H.shape[0]
    eye = sp.identity(dim, format="csr")
    L = -1j * (sp.kron(eye, H) - sp.kron(H.T, eye))
    for c in collapse:
        cdc = (c.getH() @ c).tocsr()
        L = L + sp.kron(c.conj(), c) - 0.5 * sp.kron(eye, cdc) - 0.5 * sp.kron(cdc.T, eye)
    return L.tocsc()


def _solve_density_matrix(params: CqedParams, cutoff: int):
    a, b, s = _operators(cutoff)
    ad, bd, sd = a.getH(), b.getH(), s.getH()
    g = complex(params.g_tw)
    eps = params.drive
    H = (params.delta_ap * (sd @ s) + params.delta_cp * (ad @ a + bd @ b)
         + params.h * (ad @ b + bd @ a) + eps * (a + ad)
         + np.conj(g) * (ad @ s) + g * (sd @ a) + g * (bd @ s) + np.conj(g) * (sd @ b))
    collapse = [np.sqrt(2 * params.kappa) * a, np.sqrt(2 * params.kappa) * b,
                np.sqrt(2 * params.gamma) * s]
    L = _liouvillian(H.tocsr(), collapse).tolil()
    dim = H.shape[0]
    # replace one equation by the trace condition
    trace_row = np.zeros(dim * dim, dtype=complex)
    trace_row[:: dim + 1] = 1.0
    L[0, :] = trace_row
    rhs = np.zeros(dim * dim, dtype=complex)
    rhs[0] = 1.0
    try:
        x = splu(L.tocsc()).solve(rhs)
    except RuntimeError as exc:
        raise SteadyStateError(f"null-space solve failed: {exc}") from exc
    rho = x.reshape(dim, dim, order="F")
    rho = 0.5 * (rho + rho.conj().T)
    if not np.all(np.isfinite(rho)):
        raise SteadyStateError("non-finite steady state")
    return rho, (a, b, s)


def _expect(op, rho):
    return complex((op @ rho).trace())


def _full_observables(params: CqedParams, cutoff: int):
    rho, (a, b, s) = _solve_density_matrix(params, cutoff)
    ea, eb, es = _expect(a, rho), _expect(b, rho), _expect(s, rho)
    na = _expect(a.getH() @ a, rho).real
    nb = _expect(b.getH() @ b, rho).real
    pe = _expect(s.getH() @ s, rho).real
    kex = params.kappa_ex
    root = np.sqrt(2 * kex)
    a_in = -1j * params.drive / root
    p_in = params.drive**2 / (2 * kex)
    # <a_out^+ a_out> = |a_in|^2 - 2 Re(a_in^* root <a>) + 2 kex <a^+ a>
    p_t = abs(a_in) ** 2 - 2 * (np.conj(a_in) * root * ea).real + 2 * kex * na
    p_r = 2 * kex * nb
    # occupation of the highest Fock level of either mode
    n = cutoff + 1
    diag = np.real(np.diag(rho)).reshape(2, n, n)
    top = max(diag[:, -1, :].sum(), diag[:, :, -1].sum())
    return dict(rho=rho, a=ea, b=eb, sigma=es, na=na, nb=nb, pe=pe,
                T=p_t / p_in, R=p_r / p_in, top=top)


def steady_state_full(params: CqedParams, fock_cutoff: int = 3, max_cutoff: int = 5,
                      tol: float = 1e-3, return_density: bool = False):
    """Master-equation steady state in a truncated Fock basis.

    The cutoff is raised from ``fock_cutoff`` until T changes by less than
    ``tol`` between successive cutoffs (at most ``max_cutoff``). Returns a
    CqedState; with ``return_density`` also the density matrix.
    """
    if fock_cutoff < 1:
        raise ValueError("fock_cutoff must be >= 1")
    if params.input_flux == 0 or params.kappa_ex == 0:
        st = CqedState(0j, 0j, 0j, 0.0, 0.0, 0.0, 0.0, 0.0, zero_input=True,
                       fock_cutoff=fock_cutoff)
        return (st, None) if return_density else st
    cutoff = fock_cutoff
    cur = _full_observables(params, cutoff)
    converged = False
    while True:
        if cutoff >= max_cutoff:
            break
        nxt = _full_observables(params, cutoff + 1)
        change = abs(nxt["T"] - cur["T"])
        cutoff += 1
        cur = nxt
        if change <= tol:
            converged = True
            break
    if not converged:
        warnings.warn(f"Fock truncation not converged at cutoff {cutoff}", RuntimeWarning)
    st = CqedState(cur["a"], cur["b"], cur["sigma"], float(cur["T"]), float(cur["R"]),
                   float(cur["pe"]), float(cur["na"]), float(cur["nb"]),
                   truncation_converged=converged, fock_cutoff=cutoff)
    return (st, cur["rho"]) if return_density else st


def steady_state_fixed_cutoff(params: CqedParams, fock_cutoff: int):
    """Single-cutoff master-equation solve; returns (CqedState, top-level population)."""
    cur = _full_observables(params, fock_cutoff)
    st = CqedState(cur["a"], cur["b"], cur["sigma"], float(cur["T"]), float(cur["R"]),
                   float(cur["pe"]), float(cur["na"]), float(cur["nb"]),
                   fock_cutoff=fock_cutoff)
    return st, float(cur["top"])


def transmission(params: CqedParams, solver: Solver | str = Solver.LINEAR, **kw):
    """(T, R) from the chosen solver."""
    st = (steady_state_linear(params) if Solver(solver) is Solver.LINEAR
          else steady_state_full(params, **kw))
    return st.transmission, st.reflection


def normal_mode_amplitudes(a, b):
    """Standing-wave amplitudes A = (a+b)/sqrt2, B = (a-b)/sqrt2."""
    return (a + b) / np.sqrt(2.0), (a - b) / np.sqrt(2.0)
