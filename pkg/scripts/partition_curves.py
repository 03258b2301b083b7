"""ln Z(beta) for the graph and continuum spectra, plus the local slope d lnZ/d beta."""

import argparse
import csv
import sys

import numpy as np

from hyperlattice import generate_lattice
from hyperlattice.spectra import (continuum_spectrum, graph_spectrum_dense,
                                  log_partition_function, log_partition_slope)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rings", type=int, default=4)
    ap.add_argument("--beta-max", type=float, default=40.0)
    args = ap.parse_args()
    lat = generate_lattice(7, args.rings)
    graph, cont = graph_spectrum_dense(lat), continuum_spectrum(lat.L)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["beta", "lnZ_graph", "lnZ_cont", "slope_graph", "slope_cont"])
    for beta in np.arange(1.0, args.beta_max + 0.5, 1.0):
        row = [log_partition_function(graph, beta), log_partition_function(cont, beta),
               log_partition_slope(graph, beta), log_partition_slope(cont, beta)]
        w.writerow([f"{beta:g}"] + [f"{v:.8f}" for v in row])
    print(f"# -E0 graph={-graph.values[0]:.6f} cont={-cont.values[0]:.6f}", file=sys.stderr)


if __name__ == "__main__":
    main()
