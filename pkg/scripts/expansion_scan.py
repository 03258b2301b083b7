"""Residuals of the quadratic and cubic small-h approximants for several test functions."""

import argparse

import numpy as np

from hyperlattice import generate_lattice
from hyperlattice.continuum_ops import (expansion_scan, modulus_squared_function,
                                        plane_wave_function, radial_cosine_function,
                                        real_part_function)
from hyperlattice.specfun import Momentum


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rings", type=int, default=4)
    ap.add_argument("--points", type=int, default=10)
    args = ap.parse_args()
    lat = generate_lattice(7, args.rings)
    hs = np.geomspace(0.02, 0.2, args.points)
    print("function,slope_linear,slope_quadratic,slope_cubic")
    for f in (real_part_function(), modulus_squared_function(), radial_cosine_function(),
              plane_wave_function(Momentum(2.0, 0.3))):
        rep = expansion_scan(f, lat, hs)
        print(f"{f.name},{rep.slope_linear:.4f},{rep.slope_quadratic:.4f},{rep.slope_cubic:.4f}")


if __name__ == "__main__":
    main()
