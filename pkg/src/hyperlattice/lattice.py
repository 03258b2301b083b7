"""Finite {p,3} hyperbolic lattices built ring by ring in the Poincare disk.

Ring 1 is the central p-gon. Ring k+1 consists of the p-gons that touch a
site of ring k and are not yet part of the graph; its sites are the vertices
of those p-gons not seen before. New p-gons come from 2 pi/3 rotations of
an existing p-gon about one of its vertices (the vertex generator of the
symmetry group); rotations about the central p-gon are built in because
the seed is centered at the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.spatial import cKDTree

from .geometry import hyp_distance, mobius_swap, rotation_about

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0
DEDUP_TOL = 1e-8
MAX_RINGS = 10


class NonHyperbolicError(ValueError):
    """Raised for Schlafli symbols {p,q} with (p-2)(q-2) <= 4."""


class CoordinationError(ValueError):
    """Raised when an operation needs a coordination-3 site."""


def fundamental_radius(p: int, q: int = 3) -> float:
    """Euclidean radius r0 of the vertices of the central p-gon."""
    if (p - 2) * (q - 2) <= 4:
        raise NonHyperbolicError(f"{{{p},{q}}} is not a hyperbolic tessellation")
    num = math.cos(math.pi / q + math.pi / p)
    den = math.cos(math.pi / p - math.pi / q)
    return math.sqrt(num / den)


def lattice_spacing(p: int = 7, q: int = 3) -> tuple[float, float]:
    """Nearest-neighbour distance d0 and h = tanh(d0) for {p,q}."""
    r0 = fundamental_radius(p, q)
    d0 = hyp_distance(r0, r0 * np.exp(2j * np.pi / p))
    return d0, math.tanh(d0)


def triangle_area(p: int = 7) -> float:
    """Area pi/4 (1 - 6/p) of the dual triangle attached to each site."""
    return 0.25 * math.pi * (1.0 - 6.0 / p)


def measure_constant(p: int = 7) -> float:
    """pi / triangle_area = 4p/(p-6); equals 28 for the heptagonal lattice."""
    return 4.0 * p / (p - 6.0)


def total_sites(rings: int) -> int:
    """N(l) = 7 [phi^(2l) + phi^(-2l) - 2] for the {7,3} lattice."""
    if rings <= 0:
        raise ValueError("number of rings must be positive")
    a = (3.0 + math.sqrt(5.0)) / 2.0
    b = (3.0 - math.sqrt(5.0)) / 2.0
    return int(round(7 * (a**rings + b**rings - 2)))


def ring_site_count(ring: int) -> int:
    if ring <= 0:
        raise ValueError("ring index must be positive")
    return total_sites(ring) - (total_sites(ring - 1) if ring > 1 else 0)


def effective_radius(n_sites: int, p: int = 7) -> float:
    """Radius L of the continuum disk whose measure equals N sites."""
    if n_sites < 1:
        raise ValueError("need at least one site")
    c = measure_constant(p)
    return math.sqrt(n_sites / (n_sites + c))


@dataclass(frozen=True)
class NeighborFrame:
    site: int
    chi: float
    delta: float
    images: np.ndarray = field(repr=False)


@dataclass(eq=False)
class HyperbolicLattice:
    p: int
    rings: int
    sites: np.ndarray
    ring_of: np.ndarray
    adjacency: sp.csr_matrix
    polygons: np.ndarray = field(repr=False)

    @property
    def N(self) -> int:
        return len(self.sites)

    @cached_property
    def r0(self) -> float:
        return fundamental_radius(self.p)

    @cached_property
    def d0(self) -> float:
        return lattice_spacing(self.p)[0]

    @cached_property
    def h(self) -> float:
        return lattice_spacing(self.p)[1]

    @cached_property
    def L(self) -> float:
        return effective_radius(self.N, self.p)

    @cached_property
    def coordination(self) -> np.ndarray:
        return np.asarray(self.adjacency.sum(axis=1)).ravel().astype(int)

    @cached_property
    def interior(self) -> np.ndarray:
        """Indices of coordination-3 sites."""
        return np.flatnonzero(self.coordination == 3)

    def neighbors(self, i: int) -> np.ndarray:
        a = self.adjacency
        return a.indices[a.indptr[i] : a.indptr[i + 1]]

    def edges(self) -> np.ndarray:
        upper = sp.triu(self.adjacency, k=1).tocoo()
        order = np.lexsort((upper.col, upper.row))
        return np.column_stack([upper.row[order], upper.col[order]])

    def hamiltonian(self) -> sp.csr_matrix:
        """H = -A (hopping t = 1)."""
        return (-self.adjacency).tocsr()

    def write_coordinates(self, path) -> None:
        write_coordinates(self.sites, path)

    def write_edges(self, path) -> None:
        write_edges(self.edges(), path)


def _dedup(points: np.ndarray, existing: np.ndarray, tol: float = DEDUP_TOL):
    """Split candidate points into new representatives.

    Returns (new_points, mapping) where mapping[k] is the index of candidate k
    in the concatenation [existing, new_points].
    """
    n_old = len(existing)
    allp = np.concatenate([existing, points])
    tree = cKDTree(np.column_stack([allp.real, allp.imag]))
    # |z - z'| <= tanh(d) |1 - z conj(z')|, so 2 tol (1 - |z|^2) bounds the search
    radii = 2.0 * tol * (1.0 - np.abs(points) ** 2) + 1e-15
    hits = tree.query_ball_point(np.column_stack([points.real, points.imag]), radii)
    mapping = np.empty(len(points), dtype=np.int64)
    new_index = {}
    new_pts = []
    for k, cand in enumerate(hits):
        target = None
        for j in sorted(cand):
            if j >= n_old + k:
                break
            if hyp_distance(allp[j], points[k]) < tol:
                target = j
                break
        if target is None:
            mapping[k] = n_old + len(new_pts)
            new_index[n_old + k] = mapping[k]
            new_pts.append(points[k])
        elif target < n_old:
            mapping[k] = target
        else:
            mapping[k] = new_index[target]
    return np.asarray(new_pts, dtype=complex), mapping


def _sort_key_angles(z: np.ndarray) -> np.ndarray:
    ang = np.mod(np.angle(z), 2 * np.pi)
    ang[ang > 2 * np.pi - 1e-12] = 0.0
    return np.round(ang, 12)


def generate_lattice(p: int = 7, rings: int = 1) -> HyperbolicLattice:
    """Build the {p,3} graph with the given number of rings.

    Sites are ordered ring by ring and counterclockwise within each ring,
    starting from angle 0 (the first site is r0 on the positive real axis).
    """
    if p < 7:
        raise NonHyperbolicError(f"{{{p},3}} is not hyperbolic")
    if not 1 <= rings <= MAX_RINGS:
        raise ValueError(f"rings must lie in [1, {MAX_RINGS}]")
    r0 = fundamental_radius(p)
    seed = r0 * np.exp(2j * np.pi * np.arange(p) / p)

    sites = seed.copy()
    ring_of = np.ones(p, dtype=int)
    poly_sites = [np.arange(p)]  # site indices of each polygon
    poly_verts = seed[None, :]
    centers = np.array([0j])
    owner = np.zeros(p, dtype=int)  # one polygon containing each site
    frontier = np.arange(p)

    for ring in range(2, rings + 1):
        pv = poly_verts[owner[frontier]]
        pc = centers[owner[frontier]]
        v = sites[frontier]
        cand_verts = []
        cand_centers = []
        for angle in (2 * np.pi / 3, 4 * np.pi / 3):
            cand_verts.append(rotation_about(v[:, None], angle, pv))
            cand_centers.append(rotation_about(v, angle, pc))
        # interleave so candidates follow frontier order
        cv = np.stack(cand_verts, axis=1).reshape(-1, p)
        cc = np.stack(cand_centers, axis=1).reshape(-1)
        new_centers, cmap = _dedup(cc, centers)
        fresh = cmap >= len(centers)
        _, first = np.unique(cmap[fresh], return_index=True)
        idx = np.flatnonzero(fresh)[first]
        new_polys = cv[idx]
        n_poly_old = len(centers)
        centers = np.concatenate([centers, new_centers])
        poly_verts = np.concatenate([poly_verts, new_polys])

        flat = new_polys.reshape(-1)
        new_sites, smap = _dedup(flat, sites)
        n_old = len(sites)
        sites = np.concatenate([sites, new_sites])
        ring_of = np.concatenate([ring_of, np.full(len(new_sites), ring)])
        smap = smap.reshape(-1, p)
        poly_sites.extend(list(smap))
        new_owner = np.empty(len(new_sites), dtype=int)
        for k_poly, row in enumerate(smap):
            for s in row:
                if s >= n_old:
                    new_owner[s - n_old] = n_poly_old + k_poly
        owner = np.concatenate([owner, new_owner])
        frontier = np.arange(n_old, len(sites))

    # ring-major, counterclockwise ordering
    order = np.lexsort((np.abs(sites), _sort_key_angles(sites), ring_of))
    inverse = np.empty_like(order)
    inverse[order] = np.arange(len(order))
    sites = sites[order]
    ring_of = ring_of[order]
    polygons = inverse[np.asarray(poly_sites)]

    adjacency = _adjacency_by_distance(sites, lattice_spacing(p)[0])
    return HyperbolicLattice(p=p, rings=rings, sites=sites, ring_of=ring_of,
                             adjacency=adjacency, polygons=polygons)


def _adjacency_by_distance(sites: np.ndarray, d0: float) -> sp.csr_matrix:
    """Edge iff hyperbolic distance < 1.5 d0."""
    cutoff = 1.5 * d0
    t = math.tanh(cutoff)
    radii = t * (1.0 - np.abs(sites) ** 2) / (1.0 - t) + 1e-15
    tree = cKDTree(np.column_stack([sites.real, sites.imag]))
    hits = tree.query_ball_point(np.column_stack([sites.real, sites.imag]), radii)
    rows, cols = [], []
    for i, cand in enumerate(hits):
        cand = np.asarray([j for j in cand if j != i], dtype=int)
        if len(cand) == 0:
            continue
        d = hyp_distance(sites[i], sites[cand])
        for j in cand[d < cutoff]:
            rows.extend((i, j))
            cols.extend((j, i))
    n = len(sites)
    a = sp.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n)).tocsr()
    a.data[:] = 1.0
    a.sum_duplicates()
    a.data[:] = 1.0
    return a


def polygon_adjacency(lattice: HyperbolicLattice) -> sp.csr_matrix:
    """Adjacency from polygon sides only; an independent route to the edge set."""
    polys = lattice.polygons
    i = polys.ravel()
    j = np.roll(polys, -1, axis=1).ravel()
    n = lattice.N
    a = sp.coo_matrix((np.ones(len(i)), (i, j)), shape=(n, n)).tocsr()
    a = ((a + a.T) > 0).astype(float)
    return a.tocsr()


def neighbor_frame(lattice: HyperbolicLattice, i: int, tol: float = 1e-9) -> NeighborFrame:
    """Angle chi_i of the neighbour triangle after moving site i to the origin.

    chi is only defined modulo 2 pi/3 and is returned in [0, 2 pi/3).
    """
    nb = lattice.neighbors(i)
    if len(nb) != 3:
        raise CoordinationError(
            f"site {i} has coordination {len(nb)}; the frame needs three neighbours")
    zi = lattice.sites[i]
    w = mobius_swap(zi, lattice.sites[nb])
    if np.max(np.abs(np.abs(w) - lattice.h)) > tol:
        raise ArithmeticError(f"neighbour images of site {i} are not at radius h")
    third = 2 * np.pi / 3
    chi = float(np.angle(np.mean(w**3))) / 3.0 % third
    if chi >= third:  # float modulo can land on the upper end
        chi = 0.0
    ideal = lattice.h * np.exp(1j * (chi + third * np.arange(3)))
    # images must coincide with the ideal triangle up to relabelling
    gap = np.abs(w[:, None] - ideal[None, :]).min(axis=1)
    if np.max(gap) > tol:
        raise ArithmeticError(f"neighbour images of site {i} are not equilateral")
    phi = float(np.angle(zi))
    return NeighborFrame(site=i, chi=chi, delta=chi - phi, images=w)


def frame_angles(lattice: HyperbolicLattice, sites=None) -> np.ndarray:
    """chi_i for the requested (default: all interior) sites."""
    idx = lattice.interior if sites is None else np.asarray(sites)
    return np.array([neighbor_frame(lattice, int(i)).chi for i in idx])


def match_sites(lattice: HyperbolicLattice, points: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Index of the lattice site at each point (-1 where none within tol)."""
    tree = cKDTree(np.column_stack([lattice.sites.real, lattice.sites.imag]))
    dist, idx = tree.query(np.column_stack([points.real, points.imag]))
    d = hyp_distance(lattice.sites[idx], points)
    return np.where(d < tol, idx, -1)


def write_coordinates(sites: np.ndarray, path) -> None:
    """One site per line: Re(z) Im(z), 17 significant digits."""
    lines = [f"{z.real:.17g} {z.imag:.17g}\n" for z in sites]
    _write_text("".join(lines), path)


def read_coordinates(path) -> np.ndarray:
    data = np.loadtxt(path, ndmin=2)
    return data[:, 0] + 1j * data[:, 1]


def write_edges(edges: np.ndarray, path) -> None:
    """CSV with header i,j; each undirected edge once with i < j."""
    body = "".join(f"{i},{j}\n" for i, j in edges)
    _write_text("i,j\n" + body, path)


def _write_text(text: str, path) -> None:
    if path == "-" or path is None:
        import sys
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)
