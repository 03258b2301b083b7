import math
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperlattice import generate_lattice, total_sites
from hyperlattice.geometry import hyp_distance
from hyperlattice.lattice import (MAX_RINGS, CoordinationError, NonHyperbolicError,
                                  effective_radius, frame_angles, fundamental_radius,
                                  lattice_spacing, match_sites, measure_constant,
                                  neighbor_frame, polygon_adjacency, read_coordinates,
                                  ring_site_count, triangle_area)

TABLE_N = [7, 35, 112, 315, 847, 2240, 5887, 15435, 40432, 105875]
TABLE_L = [0.447, 0.745, 0.894, 0.958, 0.984, 0.994, 0.998, 0.9990, 0.9997, 0.9999]
RING_COUNTS = [7, 28, 77, 203, 532, 1393, 3647, 9548]


def test_total_sites_closed_form():
    assert [total_sites(l) for l in range(1, 11)] == TABLE_N
    assert [ring_site_count(l) for l in range(1, 9)] == RING_COUNTS


def test_effective_radius_matches_rounded_values():
    for n, L in zip(TABLE_N, TABLE_L):
        digits = len(str(L).split(".")[1])
        assert round(effective_radius(n), digits) == pytest.approx(L)


@pytest.mark.parametrize("rings", range(1, 7))
def test_generated_counts(lattices, rings):
    lat = lattices(rings)
    assert lat.N == TABLE_N[rings - 1]
    counts = np.bincount(lat.ring_of)[1:]
    assert list(counts) == RING_COUNTS[:rings]


def test_ring_counts_at_eight_rings():
    lat = generate_lattice(7, 8)
    assert list(np.bincount(lat.ring_of)[1:]) == RING_COUNTS


def test_constants():
    d0, h = lattice_spacing(7)
    assert fundamental_radius(7) == pytest.approx(0.300743, abs=5e-7)
    assert d0 == pytest.approx(0.283128, abs=5e-7)
    assert h == pytest.approx(0.275798, abs=5e-7)
    # other p from the spacing table
    for p, d_ref, h_ref in [(8, 0.36352, 0.348311), (9, 0.409595, 0.388129), (10, 0.439590, 0.413304)]:
        d, hh = lattice_spacing(p)
        assert d == pytest.approx(d_ref, abs=5e-6)
        assert hh == pytest.approx(h_ref, abs=5e-7)


def test_spacing_from_closed_form():
    # law of cosines in curvature -1 units (2 d) on the triangle origin, v1, v2
    p = 7
    r0 = fundamental_radius(p)
    chord = hyp_distance(r0, r0 * np.exp(2j * np.pi / p))
    a = math.atanh(r0)
    cosh_side = math.cosh(2 * a) ** 2 - math.sinh(2 * a) ** 2 * math.cos(2 * math.pi / p)
    assert chord == pytest.approx(0.5 * math.acosh(cosh_side), rel=1e-13)


def test_triangle_area_and_measure():
    assert triangle_area(7) == pytest.approx(math.pi / 28)
    assert triangle_area(8) == pytest.approx(math.pi / 16)
    assert measure_constant(7) == 28
    assert measure_constant(8) == 16


def test_non_hyperbolic_rejected():
    with pytest.raises(NonHyperbolicError):
        fundamental_radius(6)
    with pytest.raises(NonHyperbolicError):
        generate_lattice(6, 2)
    with pytest.raises(ValueError):
        generate_lattice(7, 0)
    with pytest.raises(ValueError):
        generate_lattice(7, MAX_RINGS + 1)


@pytest.mark.parametrize("rings", [3, 6])
def test_edges_have_length_d0(lattices, rings):
    lat = lattices(rings)
    e = lat.edges()
    d = hyp_distance(lat.sites[e[:, 0]], lat.sites[e[:, 1]])
    assert np.max(np.abs(d - lat.d0)) < 1e-9
    # edge count: every heptagon side once
    assert np.all(e[:, 0] < e[:, 1])


@pytest.mark.parametrize("rings", [2, 4, 5])
def test_polygon_sides_give_the_same_graph(lattices, rings):
    lat = lattices(rings)
    diff = lat.adjacency - polygon_adjacency(lat)
    assert abs(diff).sum() == 0


def test_coordination_and_interior(lattices):
    lat = lattices(5)
    c = lat.coordination
    assert set(np.unique(c)) <= {2, 3}
    assert np.all(c[lat.ring_of < 5] == 3)
    assert np.array_equal(lat.interior, np.flatnonzero(c == 3))


def test_ordering_and_first_site(lattices):
    lat = lattices(3)
    assert lat.sites[0] == pytest.approx(lat.r0)
    assert np.all(np.diff(lat.ring_of) >= 0)
    for ring in (1, 2, 3):
        ang = np.mod(np.angle(lat.sites[lat.ring_of == ring]), 2 * np.pi)
        ang[ang > 2 * np.pi - 1e-9] = 0.0
        assert np.all(np.diff(ang) >= -1e-12)


@pytest.mark.parametrize("rings", [4, 6])
def test_sevenfold_symmetry(lattices, rings):
    lat = lattices(rings)
    rotated = lat.sites * np.exp(2j * np.pi / 7)
    idx = match_sites(lat, rotated, tol=1e-9)
    assert np.all(idx >= 0)
    assert len(set(idx)) == lat.N
    # the rotation is a graph automorphism
    perm = lat.adjacency[idx][:, idx]
    assert abs(perm - lat.adjacency).sum() == 0


def test_reflection_symmetry(lattices):
    lat = lattices(5)
    idx = match_sites(lat, np.conj(lat.sites))
    assert np.all(idx >= 0)


def test_deterministic():
    a = generate_lattice(7, 4)
    b = generate_lattice(7, 4)
    assert np.array_equal(a.sites, b.sites)
    assert abs(a.adjacency - b.adjacency).sum() == 0


def test_generation_runtime():
    t0 = time.perf_counter()
    generate_lattice(7, 6)
    assert time.perf_counter() - t0 < 10.0


def test_octagonal_lattice():
    lat = generate_lattice(8, 3)
    e = lat.edges()
    d = hyp_distance(lat.sites[e[:, 0]], lat.sites[e[:, 1]])
    assert np.max(np.abs(d - lattice_spacing(8)[0])) < 1e-9
    assert np.sum(lat.ring_of == 1) == 8
    assert match_sites(lat, lat.sites * np.exp(2j * np.pi / 8)).min() >= 0
    assert set(np.unique(lat.coordination)) <= {2, 3}


def test_neighbor_frame(lattices):
    lat = lattices(4)
    for i in lat.interior[:40]:
        fr = neighbor_frame(lat, int(i))
        assert 0 <= fr.chi < 2 * math.pi / 3
        assert np.allclose(np.abs(fr.images), lat.h, atol=1e-12)
    boundary = np.flatnonzero(lat.coordination == 2)[0]
    with pytest.raises(CoordinationError):
        neighbor_frame(lat, int(boundary))


def test_frame_angle_covariant_under_rotation(lattices):
    lat = lattices(4)
    chi = frame_angles(lat)
    idx = match_sites(lat, lat.sites[lat.interior] * np.exp(2j * np.pi / 7))
    chi_rot = frame_angles(lat, idx)
    expected = np.mod(chi + 2 * np.pi / 7, 2 * np.pi / 3)
    gap = np.angle(np.exp(3j * (chi_rot - expected)))
    assert np.max(np.abs(gap)) < 1e-9


def test_coordinates_round_trip(tmp_path, lattices):
    lat = lattices(3)
    path = tmp_path / "coords.dat"
    lat.write_coordinates(path)
    back = read_coordinates(path)
    assert np.array_equal(back, lat.sites)
    lat.write_edges(tmp_path / "edges.csv")
    lines = (tmp_path / "edges.csv").read_text().splitlines()
    assert lines[0] == "i,j"
    assert len(lines) - 1 == lat.adjacency.nnz // 2


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 846))
def test_neighbours_at_distance_d0(i):
    lat = _lat5()
    nb = lat.neighbors(i)
    assert 2 <= len(nb) <= 3
    d = hyp_distance(lat.sites[i], lat.sites[nb])
    assert np.allclose(d, lat.d0, atol=1e-9)


_CACHE = {}


def _lat5():
    if 5 not in _CACHE:
        _CACHE[5] = generate_lattice(7, 5)
    return _CACHE[5]
