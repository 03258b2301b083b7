"""Discrete to continuum dictionary on the {p,3} lattice.

A_h acts on a disk function by moving a site z_i to the origin, sampling f
at the three points h e^{i(chi_i + 2 pi k/3)} and mapping back. At the
physical h = tanh(d0) these are the neighbours, so A_h is the adjacency
action. Its small-h expansion is

    A_h f = 3 f + (3/4) h^2 Delta_g f - (h^3/2)[e^{3 i chi} D f + e^{-3 i chi} Dbar f] + O(h^4)

with D = d_z^2 (1-|z|^2)^3 d_z and Dbar its conjugate.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
import sympy

from .geometry import mobius_swap
from .lattice import HyperbolicLattice, lattice_spacing, measure_constant, triangle_area
from .specfun import Momentum

FD_STEP = 1e-4


class BoundarySiteError(ValueError):
    """The operation needs a coordination-3 site."""


# ------------------------------------------------------------ test functions


@dataclass
class DiskFunction:
    """A function on the disk with optional analytic Delta_g f, D f and Dbar f.

    Missing derivatives fall back to centred finite differences with
    Richardson extrapolation.
    """

    f: Callable
    laplacian: Callable | None = None
    D: Callable | None = None
    Dbar: Callable | None = None
    name: str = "f"

    def __call__(self, z):
        return self.f(np.asarray(z, dtype=complex))

    @classmethod
    def from_sympy(cls, expr, z, zb, name: str = "f") -> "DiskFunction":
        """Build from an expression in independent symbols z and zb (= conj z)."""
        w = 1 - z * zb
        lap = sympy.simplify(4 * w**2 * sympy.diff(expr, z, zb))
        D = sympy.diff(w**3 * sympy.diff(expr, z), z, 2)
        Db = sympy.diff(w**3 * sympy.diff(expr, zb), zb, 2)

        def wrap(e):
            fn = sympy.lambdify((z, zb), e, "numpy")

            def g(x):
                x = np.asarray(x, dtype=complex)
                return np.broadcast_to(fn(x, np.conj(x)), x.shape).astype(complex)
            return g
        return cls(wrap(expr), wrap(lap), wrap(D), wrap(Db), name)

    def lap_g(self, z):
        if self.laplacian is not None:
            return self.laplacian(np.asarray(z, dtype=complex))
        return fd_laplace_beltrami(self.f, z)

    def D_f(self, z):
        if self.D is not None:
            return self.D(np.asarray(z, dtype=complex))
        return fd_D(self.f, z)

    def Dbar_f(self, z):
        if self.Dbar is not None:
            return self.Dbar(np.asarray(z, dtype=complex))
        return fd_D(lambda w: self.f(np.conj(w)), np.conj(np.asarray(z, dtype=complex)))


def _richardson(op, step):
    return (4.0 * op(step / 2) - op(step)) / 3.0


def fd_laplace_beltrami(f, z, step: float = FD_STEP):
    """(1-|z|^2)^2 times the 5-point flat Laplacian, Richardson-extrapolated."""
    z = np.asarray(z, dtype=complex)

    def lap(s):
        return (f(z + s) + f(z - s) + f(z + 1j * s) + f(z - 1j * s) - 4 * f(z)) / (s * s)
    return (1.0 - np.abs(z) ** 2) ** 2 * _richardson(lap, step)


def fd_D(f, z, step: float = 1e-3):
    """D f = d_z^2 [(1-|z|^2)^3 d_z f] by nested centred differences (fallback only)."""
    z = np.asarray(z, dtype=complex)
    inner = 1e-5

    def dz(g, w, s):
        return 0.5 * ((g(w + s) - g(w - s)) / (2 * s) - 1j * (g(w + 1j * s) - g(w - 1j * s)) / (2 * s))

    def G(w):
        return (1.0 - np.abs(w) ** 2) ** 3 * dz(f, w, inner)

    def second(s):
        gxx = (G(z + s) - 2 * G(z) + G(z - s)) / (s * s)
        gyy = (G(z + 1j * s) - 2 * G(z) + G(z - 1j * s)) / (s * s)
        gxy = (G(z + s + 1j * s) - G(z + s - 1j * s) - G(z - s + 1j * s) + G(z - s - 1j * s)) / (4 * s * s)
        return 0.25 * (gxx - 2j * gxy - gyy)
    return _richardson(second, step)


def _symbols():
    return sympy.symbols("z zb")


def constant_function(c: float = 1.0) -> DiskFunction:
    return DiskFunction(lambda z: np.full(np.shape(z), c, dtype=complex),
                        lambda z: np.zeros(np.shape(z), dtype=complex),
                        lambda z: np.zeros(np.shape(z), dtype=complex),
                        lambda z: np.zeros(np.shape(z), dtype=complex), "constant")


def real_part_function() -> DiskFunction:
    z, zb = _symbols()
    return DiskFunction.from_sympy((z + zb) / 2, z, zb, "re_z")


def modulus_squared_function() -> DiskFunction:
    z, zb = _symbols()
    return DiskFunction.from_sympy(z * zb, z, zb, "abs_z_squared")


def radial_cosine_function(freq: float = math.pi) -> DiskFunction:
    """cos(freq * d(0, z)) with d(0, z) = artanh|z|."""
    z, zb = _symbols()
    d = sympy.atanh(sympy.sqrt(z * zb))
    return DiskFunction.from_sympy(sympy.cos(freq * d), z, zb, "radial_cosine")


def plane_wave_function(K: Momentum) -> DiskFunction:
    z, zb = _symbols()
    e = sympy.exp(sympy.I * K.beta)
    base = (1 - z * zb) / ((1 - z / e) * (1 - zb * e))
    expr = sympy.exp(sympy.Rational(1, 2) * (1 + sympy.I * K.k) * sympy.log(base))
    return DiskFunction.from_sympy(expr, z, zb, f"plane_wave_k{K.k:g}")


# ---------------------------------------------------------------- operators


def _frame_chi(lattice: HyperbolicLattice, sites) -> np.ndarray:
    from .lattice import neighbor_frame
    out = []
    for i in np.atleast_1d(sites):
        if lattice.coordination[i] != 3:
            raise BoundarySiteError(f"site {i} has coordination {lattice.coordination[i]}")
        out.append(neighbor_frame(lattice, int(i)).chi)
    return np.array(out)


def apply_Ah(f, lattice: HyperbolicLattice, h: float, i, chi=None):
    """Three-point Mobius neighbour sum at site(s) i with spacing parameter h."""
    if not 0.0 < h < 1.0:
        raise ValueError("need 0 < h < 1")
    idx = np.atleast_1d(i)
    chi = _frame_chi(lattice, idx) if chi is None else np.atleast_1d(chi)
    zi = lattice.sites[idx]
    out = np.zeros(len(idx), dtype=complex)
    for k in range(3):
        zeta = h * np.exp(1j * (chi + 2 * np.pi * k / 3))
        out += f(mobius_swap(zi, zeta))
    return complex(out[0]) if np.ndim(i) == 0 else out


def adjacency_action(f, lattice: HyperbolicLattice, i=None):
    """sum_j A_ij f(z_j)."""
    vals = lattice.adjacency @ f(lattice.sites)
    return vals if i is None else vals[i]


def quadratic_approx(f, z, h: float):
    """3 f + (3/4) h^2 Delta_g f; needs no neighbour frame."""
    if not isinstance(f, DiskFunction):
        f = DiskFunction(f)
    z = np.asarray(z, dtype=complex)
    out = 3.0 * f(z) + 0.75 * h * h * f.lap_g(z)
    return complex(out) if out.ndim == 0 else out


def cubic_approx(f, lattice: HyperbolicLattice, i, h: float, chi=None):
    """Quadratic approximant minus (h^3/2)[e^{3 i chi} D f + e^{-3 i chi} Dbar f]."""
    if not isinstance(f, DiskFunction):
        f = DiskFunction(f)
    idx = np.atleast_1d(i)
    chi = _frame_chi(lattice, idx) if chi is None else np.atleast_1d(chi)
    z = lattice.sites[idx]
    ph = np.exp(3j * chi)
    out = quadratic_approx(f, z, h) - 0.5 * h**3 * (ph * f.D_f(z) + np.conj(ph) * f.Dbar_f(z))
    return complex(out[0]) if np.ndim(i) == 0 else out


@dataclass
class ExpansionReport:
    h: np.ndarray
    resid_quadratic: np.ndarray
    resid_cubic: np.ndarray
    resid_linear: np.ndarray
    slope_quadratic: float
    slope_cubic: float
    slope_linear: float
    function: str = "f"
    rings: int = 0

    @property
    def fit_valid(self) -> bool:
        """Slopes are meaningful with at least 4 h values spanning a decade."""
        return len(self.h) >= 4 and self.h.max() / self.h.min() >= 10.0 - 1e-9

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["h", "resid_quadratic", "resid_cubic"])
        for row in zip(self.h, self.resid_quadratic, self.resid_cubic):
            w.writerow([f"{v:.17g}" for v in row])
        return buf.getvalue()


def loglog_slope(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2:
        return float("nan")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def expansion_scan(f: DiskFunction, lattice: HyperbolicLattice, hs) -> ExpansionReport:
    """Max-norm residuals over interior sites of A_h against its approximants."""
    hs = np.asarray(sorted(hs, reverse=True), dtype=float)
    if len(hs) == 0:
        raise ValueError("empty h list")
    sites = lattice.interior
    chi = _frame_chi(lattice, sites)
    z = lattice.sites[sites]
    lap = f.lap_g(z)
    ph = np.exp(3j * chi)
    cub = ph * f.D_f(z) + np.conj(ph) * f.Dbar_f(z)
    f0 = f(z)
    rq, rc, rl = [], [], []
    for h in hs:
        a = apply_Ah(f, lattice, h, sites, chi)
        quad = 3.0 * f0 + 0.75 * h * h * lap
        rl.append(np.max(np.abs(a - 3.0 * f0)))
        rq.append(np.max(np.abs(a - quad)))
        rc.append(np.max(np.abs(a - quad + 0.5 * h**3 * cub)))
    rq, rc, rl = map(np.array, (rq, rc, rl))
    return ExpansionReport(hs, rq, rc, rl, loglog_slope(hs, rq), loglog_slope(hs, rc),
                           loglog_slope(hs, rl), f.name, lattice.rings)


# ----------------------------------------------------------------- measure


@dataclass
class MeasureReport:
    function: str
    lattice_sum: float
    integral: float
    relative_error: float
    triangle_area: float
    scale: float = 0.0

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def disk_integral(f, L: float, tol: float = 1e-9, max_order: int = 4096) -> float:
    """int_{|z| <= L} dV_g f with dV_g = d rho d phi / 4.

    Gauss-Legendre in rho times the trapezoid rule in phi; both orders are
    doubled until successive results differ by less than tol relative to
    int |f|.
    """
    rho_L = (1.0 + L * L) / (1.0 - L * L)
    n_r, n_phi = 32, 32
    prev = None
    while True:
        x, w = np.polynomial.legendre.leggauss(n_r)
        rho = 1.0 + 0.5 * (rho_L - 1.0) * (x + 1.0)
        wr = 0.5 * (rho_L - 1.0) * w
        r = np.sqrt((rho - 1.0) / (rho + 1.0))
        phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
        zz = r[:, None] * np.exp(1j * phi[None, :])
        vals = np.real(f(zz))
        val = 0.25 * float(np.sum(wr[:, None] * vals) * (2.0 * np.pi / n_phi))
        # scale by int |f| so that integrands averaging to zero still converge
        size = 0.25 * float(np.sum(wr[:, None] * np.abs(vals)) * (2.0 * np.pi / n_phi))
        if prev is not None and abs(val - prev) <= tol * max(size, 1e-300):
            return val
        if n_r >= max_order:
            raise ArithmeticError(f"disk quadrature did not converge (last change {abs(val - prev):.3e})")
        prev = val
        n_r *= 2
        n_phi *= 2


def lattice_sum_vs_integral(f, lattice: HyperbolicLattice, name: str = "f") -> MeasureReport:
    """sum_i f(z_i) against (1/A_tri) int_{|z|<=L} dV_g f."""
    area = triangle_area(lattice.p)
    vals = np.real(f(lattice.sites))
    s = float(np.sum(vals))
    integral = disk_integral(f, lattice.L) / area
    scale = float(np.sum(np.abs(vals)))
    rel = abs(s - integral) / max(abs(integral), 1e-300)
    return MeasureReport(name, s, integral, rel, area, scale)


@dataclass(frozen=True)
class CountingFit:
    slope: float
    intercept: float
    rho: np.ndarray = field(repr=False)
    counts: np.ndarray = field(repr=False)


def counting_function(lattice: HyperbolicLattice):
    """N(r) at each distinct site radius, against rho(r)."""
    r = np.sort(np.abs(lattice.sites))
    # group equal radii (shells of the sevenfold symmetry)
    breaks = np.flatnonzero(np.diff(r) > 1e-9)
    radii = np.append(r[breaks], r[-1])
    counts = np.append(breaks + 1, len(r))
    rho = (1.0 + radii**2) / (1.0 - radii**2)
    return rho, counts


def counting_function_fit(lattice: HyperbolicLattice, complete_rings: bool = False) -> CountingFit:
    """Least-squares line N(r) = slope * rho(r) + intercept over site radii.

    The outermost ring spreads over a band of radii that is never filled
    completely, which bends N(r) down at the edge and lowers the slope as
    the lattice grows. With complete_rings=True only radii below the
    innermost site of the last ring enter the fit.
    """
    if lattice.rings < 3:
        raise ValueError("counting fit needs at least three rings")
    rho, counts = counting_function(lattice)
    if complete_rings:
        r_cut = np.abs(lattice.sites[lattice.ring_of == lattice.rings]).min()
        keep = rho < (1.0 + r_cut**2) / (1.0 - r_cut**2)
        rho, counts = rho[keep], counts[keep]
    slope, intercept = np.polyfit(rho, counts, 1)
    return CountingFit(float(slope), float(intercept), rho, counts)


# ------------------------------------------------------------ Bose-Hubbard


@dataclass(frozen=True)
class BoseHubbardParams:
    t: float
    mu: float
    U: float
    field_normalization: float


def bose_hubbard_params(t: float, mu: float, U: float, p: int = 7) -> BoseHubbardParams:
    """Continuum couplings t' = (3/4) h^2 t, mu' = mu + 3 t, U' = A_tri U.

    The continuum field is sqrt(1/A_tri) times the lattice operator
    (sqrt(28/pi) for p = 7).
    """
    h = lattice_spacing(p)[1]
    area = triangle_area(p)
    return BoseHubbardParams(0.75 * h * h * t, mu + 3.0 * t, area * U,
                             math.sqrt(measure_constant(p) / math.pi))
