"""Generate the shipped fused-silica n,k reference table.

No measured optical-constant table for fused silica is bundled with this
repository. This script writes a stand-in table from an eight-term Lorentz
parameterisation anchored to well-known properties of amorphous SiO2:

* static dielectric constant near 3.8;
* refractive index 1.4525 at 852 nm (Malitson dispersion);
* infrared reststrahlen bands near 21 um (460 cm^-1), 12.5 um (800 cm^-1)
  and 9.3 um (1070 cm^-1, with its high-frequency shoulder);
* ultraviolet absorption edge near 9-10 eV with broad interband structure
  up to about 20 eV.

The seven-oscillator fit in ``wgmtransit.surface_response`` is then run on
this table exactly as it would be on a measured one.
"""

import argparse
from pathlib import Path

import numpy as np

# (strength B_j, resonance eV, damping eV); eps = 1 + sum B w^2/(w^2 - E^2 - i g E)
REFERENCE_TERMS = [
    (0.640, 0.0570, 0.005),
    (0.120, 0.0992, 0.008),
    (0.700, 0.1330, 0.010),
    (0.250, 0.1450, 0.020),
    (0.1208, 10.3, 0.5),
    (0.2214, 11.7, 1.0),
    (0.3321, 14.4, 2.5),
    (0.4328, 17.8, 4.0),
]


def reference_epsilon(energy_ev):
    e = np.asarray(energy_ev, dtype=float)[..., None]
    b, w, g = (np.array(col) for col in zip(*REFERENCE_TERMS))
    return 1.0 + (b * w**2 / (w**2 - e**2 - 1j * g * e)).sum(-1)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default=str(Path(__file__).resolve().parents[1]
                                             / "src/wgmtransit/data/silica_reference_nk.csv"))
    parser.add_argument("--points", type=int, default=400)
    args = parser.parse_args(argv)

    energy = np.geomspace(0.01, 40.0, args.points)
    nk = np.sqrt(reference_epsilon(energy))
    wavelength_um = 1.239841984 / energy
    header = ("# fused silica optical constants, reference parameterisation\n"
              "# generated by scripts/make_silica_reference.py (see its docstring)\n"
              "energy_eV,wavelength_um,n,k")
    np.savetxt(args.out, np.column_stack([energy, wavelength_um, nk.real, nk.imag]),
               delimiter=",", header=header, comments="", fmt="%.8g")
    print(f"wrote {args.out}; n(852 nm) = {np.sqrt(reference_epsilon(1.239841984 / 0.852)).real:.5f}, "
          f"eps(0) = {reference_epsilon(0.0).real:.4f}")


if __name__ == "__main__":
    main()
