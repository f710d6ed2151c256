"""Physical constants and the repo-wide unit system.

Internal units: lengths in um, times in us, frequencies and rates as angular
frequencies in rad/us. Energies are carried as U/hbar (rad/us). Frequencies in
config files and outputs are given in MHz, meaning omega/2pi.
"""

import numpy as np
from scipy import constants as sc

HBAR = sc.hbar                      # J s
H_PLANCK = sc.h                     # J s
K_B = sc.k                          # J/K
C_LIGHT = sc.c                      # m/s
E_CHARGE = sc.e                     # C
M_E = sc.m_e                        # kg
EPS0 = sc.epsilon_0                 # F/m
AMU = sc.physical_constants["atomic mass constant"][0]
M_CS = 132.905451961 * AMU          # kg
G_EARTH = sc.g                      # m/s^2

# e^2 / (4 pi eps0 m_e): converts oscillator strength / omega^2 into a
# polarizability volume (m^3).
POL_K = E_CHARGE**2 / (4.0 * np.pi * EPS0 * M_E)
# atomic-unit polarizability volume in m^3 (a0^3)
AU_POL_VOLUME = sc.physical_constants["Bohr radius"][0] ** 3

TWO_PI = 2.0 * np.pi
MHZ = TWO_PI                        # 1 MHz (cyclic) -> rad/us
US = 1e-6                           # s per us
UM = 1e-6                           # m per um

HBAR_OVER_M = HBAR / M_CS * 1e12 * US        # um^2/us
G_EARTH_UM_US2 = G_EARTH * 1e6 * US**2        # um/us^2
C_UM_US = C_LIGHT * 1e6 * US                  # um/us
MK_RAD_US = K_B * 1e-3 / HBAR * US            # 1 mK of energy in rad/us

# Cs D2 line (6S1/2 F=4 -> 6P3/2 F=5), vacuum wavelength
CS_D2_WAVELENGTH_NM = 852.347
CS_D1_WAVELENGTH_NM = 894.593
# field (amplitude) decay rate: half the 5.234 MHz natural linewidth
CS_D2_GAMMA_MHZ = 5.234 / 2.0


def mhz_to_rad_us(f_mhz):
    """Cyclic MHz to angular rad/us."""
    return f_mhz * MHZ


def rad_us_to_mhz(w):
    """Angular rad/us to cyclic MHz."""
    return w / MHZ


def wavelength_nm_to_rad_s(lam_nm):
    """Vacuum wavelength to angular frequency in rad/s."""
    return TWO_PI * C_LIGHT / (np.asarray(lam_nm, dtype=float) * 1e-9)


def reduced_wavelength_um(lam_nm):
    """lambda/2pi in um."""
    return float(lam_nm) * 1e-3 / TWO_PI


def hz_um3(u_rad_us, d_um, power):
    """Convert U/hbar (rad/us) at distance d to a coefficient C/h in Hz um^power."""
    return np.asarray(u_rad_us) * np.asarray(d_um) ** power * 1e6 / TWO_PI
