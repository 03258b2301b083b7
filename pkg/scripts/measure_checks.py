"""Lattice sums against (1/area) times disk integrals, and the counting-function fit."""

import argparse

import numpy as np

from hyperlattice import generate_lattice
from hyperlattice.continuum_ops import counting_function_fit, lattice_sum_vs_integral


def inv_rho_squared(z):
    r2 = np.abs(z) ** 2
    return ((1 - r2) / (1 + r2)) ** 2


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-rings", type=int, default=6)
    args = ap.parse_args()
    print("rings,N,rel_err_inv_rho2,fit_slope,fit_intercept,fit_slope_complete_rings")
    for rings in range(3, args.max_rings + 1):
        lat = generate_lattice(7, rings)
        rep = lattice_sum_vs_integral(inv_rho_squared, lat)
        fit = counting_function_fit(lat)
        inner = counting_function_fit(lat, complete_rings=True) if rings > 3 else None
        inner_s = f"{inner.slope:.4f}" if inner else ""
        print(f"{rings},{lat.N},{rep.relative_error:.3e},{fit.slope:.4f},{fit.intercept:.4f},{inner_s}")


if __name__ == "__main__":
    main()
