"""Graph resolvent and the Dirichlet Green function of (lambda + Delta_g).

Continuum convention: (lambda + Delta_g) G(z, z') = -delta_g(z, z') on
|z| <= L with G = 0 on |z| = L. Writing nu for the root of
lambda = -4 nu (nu + 1) with Re nu >= -1/2,

    G = G0 - dG,
    G0 = Q_nu(y) / (2 pi),  y = cosh(2 d(z, z')),
    dG = sum_m eps_m cos(m dphi) P^-m(rho) P^-m(rho') Q^m(rho_L) / P^-m(rho_L) / (2 pi),

with eps_0 = 1, eps_m = 2. G0 is the L = 1 Green function; the m-sum is
harmonic inside the disk and cancels G0 on the boundary by the addition
theorem for Q_nu. For large m the terms behave like (r r' / L^2)^m / m,
so they are summed in the log domain until the geometric tail is below
the requested tolerance.

Graph and continuum are linked by H ~ -3 - (3/4) h^2 Delta_g and one site per
dual-triangle area pi/28, giving G_graph ~ pi/(21 h^2) G(lambda(omega)) with
lambda = 4 (omega + 3) / (3 h^2).
"""

from __future__ import annotations

import cmath
import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.special import loggamma

from .geometry import cosh2d, cosh2d_minus_one, hyp_distance
from .lattice import HyperbolicLattice, lattice_spacing
from .specfun import (Degree, legendre_P, legendre_P_minus, legendre_Q, legendre_Q0_shifted,
                      log_legendre_P_minus, log_legendre_Q)

H7 = lattice_spacing(7)[1]
M_CAP = 8192
SERIES_TOL = 1e-12
SPECTRUM_GAP = 1e-9
LU_LIMIT = 20_000


class NearSpectrumError(ValueError):
    """omega lies within SPECTRUM_GAP of an eigenvalue of H."""

    def __init__(self, omega, nearest):
        super().__init__(f"omega = {omega} is within {SPECTRUM_GAP:g} of the eigenvalue {nearest!r}")
        self.omega = omega
        self.nearest = nearest


class BranchCutError(ValueError):
    pass


@dataclass
class GreenEvaluation:
    mode: str
    parameter: complex
    L: float | None
    source: object
    values: np.ndarray
    distances: np.ndarray
    targets: np.ndarray | None = None


@dataclass
class BinnedCorrelation:
    edges: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    count: np.ndarray

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])


def bin_by_distance(d, values, edges) -> BinnedCorrelation:
    """Mean and population std of `values` in each distance bin (NaN when empty)."""
    d = np.asarray(d, dtype=float)
    values = np.asarray(values, dtype=float)
    nb = len(edges) - 1
    idx = np.clip(np.searchsorted(edges, d, side="right") - 1, 0, nb - 1)
    count = np.bincount(idx, minlength=nb)
    mean = np.full(nb, np.nan)
    std = np.full(nb, np.nan)
    for b in np.flatnonzero(count):
        v = values[idx == b]
        mean[b] = v.mean()
        std[b] = v.std()
    return BinnedCorrelation(np.asarray(edges, dtype=float), mean, std, count)


# ------------------------------------------------------------------ graph


class GraphResolvent:
    """Factorised (H - omega) for repeated column solves."""

    def __init__(self, lattice: HyperbolicLattice, omega: complex):
        self.lattice = lattice
        self.omega = complex(omega)
        n = lattice.N
        H = lattice.hamiltonian().astype(float)
        eye = sp.identity(n, format="csc")
        if abs(self.omega.imag) < SPECTRUM_GAP:
            nearest = nearest_eigenvalue(lattice, self.omega.real)
            if abs(nearest - self.omega.real) <= SPECTRUM_GAP:
                raise NearSpectrumError(self.omega, nearest)
            shifted = sp.csc_matrix(H - self.omega.real * eye)
        else:
            shifted = sp.csc_matrix(H.astype(complex) - self.omega * eye)
        shifted.sort_indices()
        self._matrix = shifted
        self._lu = spla.splu(shifted) if n <= LU_LIMIT else None

    def column(self, i: int) -> np.ndarray:
        rhs = np.zeros(self.lattice.N, dtype=self._matrix.dtype)
        rhs[i] = 1.0
        if self._lu is not None:
            return self._lu.solve(rhs)
        # conjugate gradients on the normal equations for very large graphs
        A = self._matrix
        normal = spla.LinearOperator(A.shape, matvec=lambda v: A.conj().T @ (A @ v), dtype=A.dtype)
        x, info = spla.cg(normal, A.conj().T @ rhs, rtol=1e-13, maxiter=20 * self.lattice.N)
        if info != 0:
            raise RuntimeError(f"normal-equation CG failed with code {info}")
        return x


def nearest_eigenvalue(lattice: HyperbolicLattice, omega: float) -> float:
    H = lattice.hamiltonian()
    if lattice.N <= 3000:
        vals = np.linalg.eigvalsh(H.toarray())
        return float(vals[np.argmin(np.abs(vals - omega))])
    # shift-invert about a point just off omega so the factorisation exists
    vals = spla.eigsh(H.astype(float), k=1, sigma=omega + 1e-7, return_eigenvectors=False)
    return float(vals[0])


def graph_green_column(lattice: HyperbolicLattice, omega: complex, i: int,
                       resolvent: GraphResolvent | None = None) -> GreenEvaluation:
    res = resolvent or GraphResolvent(lattice, omega)
    col = res.column(i)
    d = hyp_distance(lattice.sites[i], lattice.sites)
    return GreenEvaluation("graph", complex(omega), lattice.L, int(i), col, np.asarray(d),
                           lattice.sites)


def green_eigensum(lattice: HyperbolicLattice, omega: complex, i: int) -> np.ndarray:
    """sum_n psi_n psi_n(i)^* / (E_n - omega) from a dense eigendecomposition."""
    E, psi = np.linalg.eigh(lattice.hamiltonian().toarray())
    return (psi * (psi[i].conj() / (E - omega))[None, :]).sum(axis=1)


# -------------------------------------------------------------- continuum


def green_mapping(omega: complex, h: float = H7) -> tuple[complex, float]:
    """lambda = 4 (omega + 3) / (3 h^2) and the prefactor pi / (21 h^2)."""
    lam = 4.0 * (complex(omega) + 3.0) / (3.0 * h * h)
    return lam, math.pi / (21.0 * h * h)


def decaying_degree(lam) -> complex:
    """Root of lambda = -4 nu (nu+1) with Re nu >= -1/2 (principal square root)."""
    return 0.5 * (-1.0 + cmath.sqrt(1.0 - complex(lam)))


def _check_lambda(lam):
    lam = complex(lam)
    if abs(lam.imag) < 1e-14 and lam.real >= 1.0:
        raise BranchCutError(f"lambda = {lam} lies on the cut [1, inf)")
    return lam


def _rho(z):
    r2 = np.abs(np.asarray(z, dtype=complex)) ** 2
    return (1.0 + r2) / (1.0 - r2)


def _delta_series(nu, z, zp, L, tol=SERIES_TOL, m_cap=M_CAP):
    """dG for one source z against an array of targets zp."""
    z = complex(z)
    zp = np.atleast_1d(np.asarray(zp, dtype=complex))
    rho_L = (1.0 + L * L) / (1.0 - L * L)
    rho = _rho(z)
    rhop = _rho(zp)
    dphi = np.angle(zp) - cmath.phase(z)
    q = abs(z) * np.abs(zp) / (L * L)
    total = np.zeros(zp.shape, dtype=complex)
    done = q >= 1.0 - 1e-15  # both points on the boundary: G0 - dG = 0 is handled by caller
    quiet = np.zeros(zp.shape, dtype=int)
    for m in range(m_cap + 1):
        active = ~done
        if not active.any():
            break
        eps = 1.0 if m == 0 else 2.0
        lp_src = log_legendre_P_minus(nu, m, rho)[0] if abs(z) > 0 else (0.0 if m == 0 else -np.inf)
        lp_L = log_legendre_P_minus(nu, m, rho_L)[0]
        lq_L = log_legendre_Q(nu, m, rho_L)[0]
        rp = rhop[active]
        lp_t = np.where(np.abs(zp[active]) > 0,
                        log_legendre_P_minus(nu, m, np.maximum(rp, 1.0)),
                        0.0 if m == 0 else -np.inf)
        with np.errstate(invalid="ignore", over="ignore"):
            logterm = lp_src + lp_t + lq_L - lp_L
            term = np.where(np.isneginf(logterm.real), 0.0,
                            eps / (2 * np.pi) * np.cos(m * dphi[active]) * np.exp(logterm))
            size = np.where(np.isneginf(logterm.real), 0.0, eps / (2 * np.pi) * np.exp(logterm.real))
        total[active] += term
        # geometric tail estimate with ratio q
        qa = q[active]
        tail = size * qa / np.maximum(1.0 - qa, 1e-300)
        small = tail <= tol * np.maximum(np.abs(total[active]), 1e-300)
        idx = np.flatnonzero(active)
        quiet[idx[small]] += 1
        quiet[idx[~small]] = 0
        done[idx[(quiet[idx] >= 2) & (m >= 1)]] = True
        if m == 0 and abs(z) == 0:
            done[:] = True
    else:
        if (~done).any():
            raise RuntimeError(f"boundary series did not converge within {m_cap} orders")
    return total


def continuum_green(z, zp, lam, L: float, tol: float = SERIES_TOL):
    """Dirichlet Green function G(z, z', lambda, L); zp may be an array."""
    lam = _check_lambda(lam)
    if not 0.0 < L < 1.0:
        raise ValueError("need 0 < L < 1")
    z = complex(z)
    zp_arr = np.atleast_1d(np.asarray(zp, dtype=complex))
    if abs(z) > L * (1 + 1e-12) or np.any(np.abs(zp_arr) > L * (1 + 1e-12)):
        raise ValueError("points must satisfy |z| <= L")
    if np.any(np.abs(zp_arr - z) == 0.0):
        raise ValueError("source and target coincide (logarithmic singularity)")
    nu = decaying_degree(lam)
    g0 = np.atleast_1d(legendre_Q0_shifted(nu, cosh2d_minus_one(z, zp_arr))) / (2 * np.pi)
    dg = _delta_series(nu, z, zp_arr, L, tol)
    out = g0 - dg
    # both endpoints on the circle: the function vanishes identically
    out[(abs(z) >= L * (1 - 1e-15)) & (np.abs(zp_arr) >= L * (1 - 1e-15))] = 0.0
    return complex(out[0]) if np.ndim(zp) == 0 else out


def continuum_green_central(zp, lam, L: float):
    """Source at the origin: [Q_nu(rho) - Q_nu(rho_L)/P_nu(rho_L) P_nu(rho)] / (2 pi)."""
    nu = decaying_degree(_check_lambda(lam))
    rho = _rho(zp)
    rho_L = (1.0 + L * L) / (1.0 - L * L)
    ratio = legendre_Q(nu, 0, rho_L) / legendre_P(nu, 0, rho_L)
    out = (np.asarray(legendre_Q(nu, 0, rho)) - ratio * np.asarray(legendre_P(nu, 0, rho))) / (2 * np.pi)
    return complex(out) if np.ndim(out) == 0 else out


def green_laplace_closed_form(z, zp, L: float = 1.0):
    """lambda = 0: -(1/4 pi) ln |L (z - z') / (L^2 - z conj(z'))|^2."""
    z = np.asarray(z, dtype=complex)
    zp = np.asarray(zp, dtype=complex)
    ratio = L * (z - zp) / (L * L - z * np.conj(zp))
    return -np.log(np.abs(ratio) ** 2) / (4 * np.pi)


def infinite_disk_green(z, zp, lam):
    """L = 1 Green function Q_nu(y)/(2 pi), a function of y = cosh(2 d) only."""
    lam = _check_lambda(lam)
    nu = decaying_degree(lam)
    ym1 = cosh2d_minus_one(z, zp)
    if np.any(np.asarray(ym1) <= 0.0):
        raise ValueError("source and target coincide")
    out = np.asarray(legendre_Q0_shifted(nu, ym1)) / (2 * np.pi)
    return complex(out) if np.ndim(out) == 0 else out


def infinite_disk_constant(lam) -> complex:
    """C = lim_{y->inf} Q_nu(y)/P_nu(y) for the degree nu = (-1 + i sqrt(lambda - 1))/2.

    For Re nu < -1/2 this makes Q_nu - C P_nu decay at infinity. The limit is
    taken numerically: the ratio approaches C like y^(2 nu + 1), so a
    Richardson step with that known exponent is applied.
    """
    deg = Degree.from_lambda(_check_lambda(lam))
    nu = deg.nu
    if nu.real >= -0.5:
        return 0.0 + 0j
    ys = np.array([1e5, 1e7, 1e9])
    ratios = np.array([legendre_Q(nu, 0, y) / legendre_P(nu, 0, y) for y in ys])
    p = 2.0 * nu + 1.0
    w = (ys[-1] / ys[-2]) ** p
    return complex((ratios[-1] - w * ratios[-2]) / (1.0 - w))


def infinite_disk_constant_gamma(lam) -> complex:
    """Closed form pi Gamma(nu+1) Gamma(-nu) / (Gamma(nu+3/2) Gamma(-nu-1/2)) (cross-check)."""
    nu = Degree.from_lambda(_check_lambda(lam)).nu
    return complex(math.pi * np.exp(loggamma(nu + 1) + loggamma(-nu)
                                    - loggamma(nu + 1.5) - loggamma(-nu - 0.5)))


def infinite_disk_green_subtracted(z, zp, lam):
    """(1/2 pi)[Q_nu(y) - C P_nu(y)] with the degree on the lambda branch (cross-check)."""
    nu = Degree.from_lambda(_check_lambda(lam)).nu
    y = cosh2d(z, zp)
    c = infinite_disk_constant(lam)
    out = (np.asarray(legendre_Q(nu, 0, y)) - c * np.asarray(legendre_P(nu, 0, y))) / (2 * np.pi)
    return complex(out) if np.ndim(out) == 0 else out


# --------------------------------------------------------------- compare


@dataclass
class GreenComparison:
    graph: BinnedCorrelation
    continuum: BinnedCorrelation
    distances: np.ndarray
    graph_values: np.ndarray
    continuum_values: np.ndarray
    omega: complex
    lam: complex
    prefactor: float
    source: int
    targets: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    def within_one_std(self, min_count: int = 5) -> np.ndarray:
        """Per-bin flag: the two binned means differ by at most one binned std.

        The larger of the graph and continuum spreads is used; bins with fewer
        than min_count pairs are not judged.
        """
        g, c = self.graph, self.continuum
        ok = np.abs(g.mean - c.mean) <= np.maximum(g.std, c.std)
        return np.where(g.count >= min_count, ok, True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["d_bin_center", "graph_mean", "graph_std", "cont_mean", "cont_std", "count"])
        for row in zip(self.graph.centers, self.graph.mean, self.graph.std,
                       self.continuum.mean, self.continuum.std, self.graph.count):
            w.writerow([f"{v:.17g}" for v in row[:-1]] + [int(row[-1])])
        return buf.getvalue()

    def scatter_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["site", "distance", "graph", "continuum"])
        for j, d, g, c in zip(self.targets, self.distances, self.graph_values,
                              self.continuum_values):
            w.writerow([int(j), f"{d:.17g}", f"{g:.17g}", f"{c:.17g}"])
        return buf.getvalue()


def compare_green(lattice: HyperbolicLattice, omega: complex, i: int, bins: int = 30,
                  h: float | None = None) -> GreenComparison:
    """Graph column against prefactor * G(z_i, z_j, lambda(omega), L), binned by d_ij.

    The source itself is excluded (the continuum function is singular there).
    Complex omega is compared on real parts.
    """
    h = lattice.h if h is None else h
    lam, pref = green_mapping(omega, h)
    col = graph_green_column(lattice, omega, i)
    mask = np.arange(lattice.N) != i
    zi = lattice.sites[i]
    zj = lattice.sites[mask]
    d = hyp_distance(zi, zj)
    # sites just outside |z| = L are clipped onto the circle
    zj_c = np.where(np.abs(zj) > lattice.L, zj / np.abs(zj) * lattice.L, zj)
    cont = pref * np.asarray(continuum_green(zi, zj_c, lam, lattice.L))
    g = col.values[mask]
    gv, cv = np.real(g), np.real(cont)
    edges = np.linspace(0.0, float(d.max()), bins + 1)
    return GreenComparison(bin_by_distance(d, gv, edges), bin_by_distance(d, cv, edges),
                           d, gv, cv, complex(omega), lam, pref, int(i), np.flatnonzero(mask))
