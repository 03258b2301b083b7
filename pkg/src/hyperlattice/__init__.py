"""Hyperbolic {7,3} lattices, their spectra, and the continuum description."""

from .geometry import DiskPoint, Automorphism, hyp_distance
from .lattice import HyperbolicLattice, generate_lattice, total_sites, effective_radius

__all__ = [
    "DiskPoint",
    "Automorphism",
    "hyp_distance",
    "HyperbolicLattice",
    "generate_lattice",
    "total_sites",
    "effective_radius",
]
