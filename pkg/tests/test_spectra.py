import json
import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperlattice import effective_radius, generate_lattice, total_sites
from hyperlattice.spectra import (E_INF, BracketingError, DenseSizeError, SpectralSet,
                                  asymptotic_energy, continuum_energy, continuum_levels,
                                  continuum_momenta, continuum_spectrum, graph_spectrum_dense,
                                  graph_spectrum_lanczos, lanczos_lowest, log_partition_function,
                                  log_partition_slope, lowest_momentum_estimate,
                                  momentum_from_energy, partition_function)
from hyperlattice.specfun import legendre_P_minus

GRAPH_E0 = [-2.0, -2.636, -2.787, -2.847, -2.877, -2.894]
GRAPH_E1 = [None, -2.283, -2.627, -2.762, -2.827, -2.863]
CONT_E0 = [-1.500, -2.570, -2.770, -2.842, -2.876, -2.895, -2.906, -2.914, -2.920, -2.924]
CONT_E1 = [0.620, -2.085, -2.578, -2.746, -2.821, -2.861, -2.884, -2.899, -2.908, -2.915]
ASYM_E0 = [-2.535, -2.738, -2.820, -2.861, -2.884, -2.899, -2.909, -2.916, -2.921, -2.924]
ASYM_E1 = [15.58, -1.633, -2.507, -2.728, -2.815, -2.858, -2.883, -2.898, -2.908, -2.915]


def test_seven_cycle_exact():
    vals = graph_spectrum_dense(generate_lattice(7, 1)).values
    expected = np.sort(-2 * np.cos(2 * np.pi * np.arange(7) / 7))
    assert np.allclose(vals, expected, atol=1e-14)
    assert vals[0] == -2.0 or abs(vals[0] + 2.0) < 1e-15


@pytest.mark.parametrize("rings", range(2, 7))
def test_dense_energies_match_table(lattices, rings):
    vals = graph_spectrum_dense(lattices(rings)).values
    assert vals[0] == pytest.approx(GRAPH_E0[rings - 1], abs=1e-3)
    assert vals[1] == pytest.approx(GRAPH_E1[rings - 1], abs=1e-3)


def test_graph_spectrum_sum_rules(lattices):
    lat = lattices(4)
    vals = graph_spectrum_dense(lat).values
    assert abs(vals.sum()) < 1e-10
    assert np.sum(vals**2) == pytest.approx(lat.adjacency.nnz, rel=1e-12)
    assert vals.min() > -3.0 and vals.max() < 3.0


def test_dense_limit_enforced():
    with pytest.raises(DenseSizeError):
        graph_spectrum_dense(generate_lattice(7, 8))


def test_lanczos_matches_dense(lattices):
    lat = lattices(5)
    dense = graph_spectrum_dense(lat).values[:4]
    lz = graph_spectrum_lanczos(lat, count=4).values
    assert np.max(np.abs(lz - dense)) < 1e-8


@settings(max_examples=15, deadline=None)
@given(st.integers(30, 120), st.integers(1, 4), st.integers(0, 10_000))
def test_lanczos_on_random_sparse_matrices(n, count, seed):
    rng = np.random.default_rng(seed)
    a = sp.random(n, n, density=0.1, random_state=rng)
    a = (a + a.T).tocsr() + sp.diags(rng.normal(size=n))
    vals, _, _ = lanczos_lowest(a, n, count, tol=1e-11)
    ref = np.linalg.eigvalsh(a.toarray())[:count]
    assert np.allclose(vals, ref, atol=1e-8)


def test_lanczos_resolves_degenerate_pair(lattices):
    # E1 is twofold degenerate (angular momentum +-1)
    vals = graph_spectrum_lanczos(lattices(4), count=3).values
    assert vals[1] == pytest.approx(vals[2], abs=1e-9)


def test_continuum_energy_map():
    assert continuum_energy(0.0) == pytest.approx(E_INF)
    assert E_INF == pytest.approx(-2.94295, abs=5e-6)
    assert momentum_from_energy(continuum_energy(1.7)) == pytest.approx(1.7)
    with pytest.raises(ValueError):
        continuum_energy(-1.0)


@pytest.mark.parametrize("rings", range(1, 11))
def test_continuum_rows(rings):
    e0 = continuum_levels(rings, 0, 1)[0]
    e1 = continuum_levels(rings, 1, 1)[0]
    assert e0 == pytest.approx(CONT_E0[rings - 1], abs=1e-3)
    assert e1 == pytest.approx(CONT_E1[rings - 1], abs=1e-3)


@pytest.mark.parametrize("rings", range(1, 11))
def test_asymptotic_rows(rings):
    assert asymptotic_energy(rings, 0) == pytest.approx(ASYM_E0[rings - 1], abs=1e-2)
    assert asymptotic_energy(rings, 1) == pytest.approx(ASYM_E1[rings - 1], abs=1e-2)


def test_asymptotic_close_to_exact_at_ten_rings():
    assert abs(continuum_levels(10, 0, 1)[0] - asymptotic_energy(10, 0)) <= 1e-3
    with pytest.raises(ValueError):
        asymptotic_energy(5, 2)


@pytest.mark.parametrize("m", [0, 1, 3])
def test_dirichlet_roots_are_roots(m):
    L = effective_radius(total_sites(4))
    rho_L = (1 + L * L) / (1 - L * L)
    ks = continuum_momenta(L, m, count=3)
    assert np.all(np.diff(ks) > 0)
    for k in ks:
        val = legendre_P_minus(0.5 * (-1 + 1j * k), m, rho_L).real
        nearby = legendre_P_minus(0.5 * (-1 + 1j * (k + 0.05)), m, rho_L).real
        assert abs(val) < 1e-9 * abs(nearby)


def test_roots_increase_with_m():
    L = effective_radius(total_sites(5))
    k = [continuum_momenta(L, m, count=1)[0] for m in range(4)]
    assert np.all(np.diff(k) > 0)


def test_lowest_momentum_estimate():
    L = effective_radius(total_sites(10))
    k0 = continuum_momenta(L, 0, count=1)[0]
    assert lowest_momentum_estimate(L) == pytest.approx(k0, rel=0.05)


def test_momentum_scan_errors():
    with pytest.raises(ValueError):
        continuum_momenta(1.2, 0, count=1)
    with pytest.raises(ValueError):
        continuum_momenta(0.9, 0)
    with pytest.raises(BracketingError):
        continuum_momenta(0.5, 0, count=3, k_max=1.0)


def test_continuum_spectrum_degeneracy():
    L = effective_radius(total_sites(4))
    spec = continuum_spectrum(L)
    assert np.all(spec.values < 0)
    ms = [m for _, m in spec.labels]
    for m in set(ms):
        assert ms.count(m) == ms.count(-m)
    assert spec.values[0] == pytest.approx(continuum_levels(4, 0, 1)[0])


def test_spectral_set_sorted_and_serialisable():
    s = SpectralSet([0.5, -1.0, 0.2], "graph-dense", labels=[(0, 0), (1, 0), (2, 0)], rings=2)
    assert list(s.values) == [-1.0, 0.2, 0.5]
    assert s.labels[0] == (1, 0)
    rec = json.loads(s.to_json())
    assert rec["values"] == [-1.0, 0.2, 0.5]
    with pytest.raises(ValueError):
        SpectralSet([1.0], "bogus")


def test_partition_function_basics():
    assert partition_function([0.5, 1.0], 1.0).empty
    res = partition_function([-1.0, -2.0, 3.0], 2.0)
    assert res.n_negative == 2
    assert res.Z == pytest.approx(math.exp(2) + math.exp(4))
    with pytest.raises(ValueError):
        partition_function([-1.0], -1.0)
    with pytest.raises(ValueError):
        log_partition_function([1.0], 1.0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-3.0, 3.0), min_size=1, max_size=40), st.floats(0.1, 200.0))
def test_log_partition_stable_and_bounded(values, beta):
    vals = np.array(values)
    if not np.any(vals < 0):
        return
    lnz = log_partition_function(vals, beta)
    e0 = vals[vals < 0].min()
    n = np.sum(vals < 0)
    assert -beta * e0 - 1e-9 <= lnz <= -beta * e0 + math.log(n) + 1e-9


def test_partition_slope_tends_to_ground_state(lattices):
    vals = graph_spectrum_dense(lattices(3)).values
    assert log_partition_slope(vals, 60.0) == pytest.approx(-vals[0], rel=1e-3)
