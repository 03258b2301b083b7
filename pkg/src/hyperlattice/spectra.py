"""Low-lying spectra of H = -A and of the Dirichlet continuum operator.

The continuum operator is H_cont = -3 - (3/4) h^2 Delta_g on |z| <= L.
Its eigenfunctions are P_nu^-m(rho) e^{i m phi} with nu = (-1 + i k)/2,
the energies are E = -3 + (3/4) h^2 (1 + k^2), and the Dirichlet condition
at rho_L = (1+L^2)/(1-L^2) quantises k.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import brentq

from .lattice import GOLDEN, HyperbolicLattice, lattice_spacing, total_sites, effective_radius
from .specfun import legendre_P_minus, legendre_P_minus_degrees

DENSE_LIMIT = 6000
ROOT_STEP = 0.02
H7 = lattice_spacing(7)[1]
E_INF = -3.0 + 0.75 * H7**2

PROVENANCES = ("graph-dense", "graph-lanczos", "continuum-root")


class DenseSizeError(ValueError):
    pass


class LanczosConvergenceError(RuntimeError):
    pass


class BracketingError(RuntimeError):
    pass


@dataclass
class SpectralSet:
    values: np.ndarray
    provenance: str
    labels: list = field(default_factory=list)
    p: int = 7
    rings: int | None = None
    L: float | None = None
    m: int | None = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        v = np.asarray(self.values, dtype=float)
        order = np.argsort(v, kind="stable")
        self.values = v[order]
        if self.labels:
            self.labels = [tuple(self.labels[i]) for i in order]

    def __len__(self) -> int:
        return len(self.values)

    def to_record(self) -> dict:
        rec = asdict(self)
        rec["values"] = [float(v) for v in self.values]
        rec["labels"] = [list(map(int, lab)) for lab in self.labels]
        return rec

    def to_json(self) -> str:
        return json.dumps(self.to_record(), indent=2, default=_json_default)


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialise {type(o)}")


# ----------------------------------------------------------------- graph


def graph_spectrum_dense(lattice: HyperbolicLattice) -> SpectralSet:
    if lattice.N > DENSE_LIMIT:
        raise DenseSizeError(
            f"N = {lattice.N} exceeds the dense limit {DENSE_LIMIT}; use graph_spectrum_lanczos")
    t0 = time.perf_counter()
    vals = np.linalg.eigvalsh(-lattice.adjacency.toarray())
    return SpectralSet(vals, "graph-dense", p=lattice.p, rings=lattice.rings,
                       diagnostics={"seconds": time.perf_counter() - t0})


def lanczos_lowest(op, n: int, count: int, tol: float = 1e-10, basis: int = 80,
                   keep: int = 20, max_restarts: int = 500, seed: int = 0):
    """Lowest `count` eigenpairs of a symmetric operator.

    Thick-restart Lanczos with full reorthogonalisation. Eigenpairs are
    found one per pass and locked; each pass starts from a fresh random
    vector orthogonal to the locked ones, so degenerate copies are found.
    Convergence: Ritz residual ||H y - theta y|| < tol.
    """
    rng = np.random.default_rng(seed)
    matvec = op.dot if hasattr(op, "dot") else op
    basis = min(basis, n)
    keep = min(keep, basis - 2)
    locked = np.zeros((n, 0))
    values, residuals, iterations = [], [], []

    def project(w):
        for _ in range(2):
            if locked.shape[1]:
                w = w - locked @ (locked.T @ w)
        return w

    for _ in range(count):
        space = n - locked.shape[1]
        if space <= 0:
            break
        m = min(basis, space)
        V = np.zeros((n, m))
        HV = np.zeros((n, m))
        v = project(rng.standard_normal(n))
        V[:, 0] = v / np.linalg.norm(v)
        start, steps, done = 0, 0, False
        for _restart in range(max_restarts):
            resid = None
            for j in range(start, m):
                HV[:, j] = project(matvec(V[:, j]))
                steps += 1
                w = HV[:, j].copy()
                for _ in range(2):
                    w -= V[:, : j + 1] @ (V[:, : j + 1].T @ w)
                w = project(w)
                beta = np.linalg.norm(w)
                if beta < 1e-12:
                    # invariant subspace: continue with a random direction
                    w = project(rng.standard_normal(n))
                    for _ in range(2):
                        w -= V[:, : j + 1] @ (V[:, : j + 1].T @ w)
                    beta = np.linalg.norm(w)
                if j + 1 < m:
                    V[:, j + 1] = w / beta
                else:
                    resid = w / beta
            T = V.T @ HV
            T = 0.5 * (T + T.T)
            theta, S = np.linalg.eigh(T)
            y = V @ S[:, 0]
            r = np.linalg.norm(HV @ S[:, 0] - theta[0] * y)
            if r < tol or m == space:
                done = True
                break
            kk = min(keep, m - 1)
            V[:, :kk] = V @ S[:, :kk]
            HV[:, :kk] = HV @ S[:, :kk]
            V[:, kk] = resid
            start = kk
        if not done:
            raise LanczosConvergenceError(
                f"Lanczos did not converge after {max_restarts} restarts; residual {r:.3e}")
        y /= np.linalg.norm(y)
        values.append(float(theta[0]))
        residuals.append(float(r))
        iterations.append(steps)
        locked = np.column_stack([locked, y])
    return np.array(values), locked, {"residuals": residuals, "matvecs": iterations}


def graph_spectrum_lanczos(lattice: HyperbolicLattice, count: int = 2, tol: float = 1e-10,
                           seed: int = 0) -> SpectralSet:
    if count < 1 or count >= lattice.N:
        raise ValueError("count must satisfy 1 <= count < N")
    t0 = time.perf_counter()
    H = lattice.hamiltonian()
    vals, _, diag = lanczos_lowest(H, lattice.N, count, tol=tol, seed=seed)
    diag["seconds"] = time.perf_counter() - t0
    return SpectralSet(vals, "graph-lanczos", p=lattice.p, rings=lattice.rings, diagnostics=diag)


# ------------------------------------------------------------- continuum


def continuum_energy(k, h: float = H7):
    """E = -3 + (3/4) h^2 (1 + k^2)."""
    k = np.asarray(k, dtype=float)
    if np.any(k < 0):
        raise ValueError("momentum must be nonnegative")
    out = -3.0 + 0.75 * h * h * (1.0 + k * k)
    return float(out) if out.ndim == 0 else out


def momentum_from_energy(E, h: float = H7) -> float:
    return math.sqrt((E + 3.0) / (0.75 * h * h) - 1.0)


def _dirichlet_function(rho_L: float, m: int):
    def f(k):
        return legendre_P_minus(0.5 * (-1.0 + 1j * k), m, rho_L).real
    return f


def lowest_momentum_estimate(L: float) -> float:
    """Large-radius estimate k_0 ~ 2 pi / ln(8 (1+L^2)/(1-L^2))."""
    return 2.0 * math.pi / math.log(8.0 * (1.0 + L * L) / (1.0 - L * L))


def continuum_momenta(L: float, m: int, count: int | None = None, k_max: float | None = None,
                      step: float = ROOT_STEP) -> np.ndarray:
    """Smallest positive roots k of P_nu^-m(rho_L) = 0, nu = (-1+ik)/2.

    Either `count` roots are returned (the scan window grows until found),
    or every root below `k_max`.
    """
    if not 0.0 < L < 1.0:
        raise ValueError("need 0 < L < 1")
    if count is None and k_max is None:
        raise ValueError("give count or k_max")
    m = abs(int(m))
    rho_L = (1.0 + L * L) / (1.0 - L * L)
    f = _dirichlet_function(rho_L, m)
    roots: list[float] = []
    k_hi = k_max if k_max is not None else 3.0 * lowest_momentum_estimate(L) * (1 + m)
    k_lo = 0.0
    while True:
        # scan on a grid with the vectorised routine, refine with the scalar one
        grid = np.arange(k_lo, k_hi + 0.5 * step, step)
        vals = legendre_P_minus_degrees(0.5 * (-1.0 + 1j * grid), m, rho_L).real
        for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
            if fa == 0.0 and a > 0.0:
                roots.append(a)
            elif fa * fb < 0:
                roots.append(brentq(f, a, b, xtol=1e-13, maxiter=200))
            if count is not None and len(roots) >= count:
                return np.array(roots[:count])
        if k_max is not None:
            if count is not None and len(roots) < count:
                raise BracketingError(
                    f"found {len(roots)} of {count} roots on [0, {k_max}] with step {step}")
            return np.array(roots)
        if k_hi > 1e4:
            raise BracketingError(f"no bracket found on [0, {k_hi}] with step {step}")
        k_lo = grid[-1]
        k_hi *= 2.0


def continuum_levels(rings: int, m: int = 0, count: int = 1, h: float = H7) -> np.ndarray:
    """Energies of the lowest `count` Dirichlet modes of angular momentum m
    on the disk whose radius matches the ring count."""
    L = effective_radius(total_sites(rings))
    return continuum_energy(continuum_momenta(L, m, count), h)


def continuum_spectrum(L: float, e_max: float = 0.0, h: float = H7,
                       m_max: int = 200) -> SpectralSet:
    """Every Dirichlet mode with E < e_max; m != 0 modes appear twice (+m, -m)."""
    k_max = momentum_from_energy(e_max, h)
    vals, labels = [], []
    for m in range(m_max + 1):
        ks = continuum_momenta(L, m, k_max=k_max)
        if len(ks) == 0:
            break
        for n, k in enumerate(ks):
            e = continuum_energy(k, h)
            vals.append(e)
            labels.append((n, m))
            if m:
                vals.append(e)
                labels.append((n, -m))
    return SpectralSet(np.array(vals), "continuum-root", labels=labels, L=L)


def asymptotic_energy(rings, level: int = 0, h: float = H7):
    """E_inf + (3 pi^2 h^2 / 4) / (ln(phi) l + c)^2 with c_0 = ln 2, c_1 = ln 2 - 1."""
    if level not in (0, 1):
        raise ValueError("level must be 0 or 1")
    rings = np.asarray(rings, dtype=float)
    if np.any(rings < 1):
        raise ValueError("ring count must be >= 1")
    c = math.log(2.0) - level
    e_inf = -3.0 + 0.75 * h * h
    out = e_inf + 0.75 * math.pi**2 * h * h / (math.log(GOLDEN) * rings + c) ** 2
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------- thermodynamics


@dataclass(frozen=True)
class PartitionResult:
    Z: float
    n_negative: int
    empty: bool


def partition_function(spectrum, beta: float) -> PartitionResult:
    """Z = sum over E < 0 of exp(-beta E)."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    vals = np.asarray(spectrum.values if isinstance(spectrum, SpectralSet) else spectrum)
    neg = vals[vals < 0]
    if len(neg) == 0:
        return PartitionResult(0.0, 0, True)
    # shift by the minimum to avoid overflow
    e0 = neg.min()
    z = math.exp(-beta * e0) * float(np.sum(np.exp(-beta * (neg - e0))))
    return PartitionResult(z, len(neg), False)


def log_partition_function(spectrum, beta: float) -> float:
    vals = np.asarray(spectrum.values if isinstance(spectrum, SpectralSet) else spectrum)
    neg = vals[vals < 0]
    if len(neg) == 0:
        raise ValueError("no negative energies: Z = 0")
    e0 = neg.min()
    return float(-beta * e0 + np.log(np.sum(np.exp(-beta * (neg - e0)))))


def log_partition_slope(spectrum, beta: float, dbeta: float = 1e-3) -> float:
    """d ln Z / d beta by central differences; tends to -E_0 as beta grows."""
    return (log_partition_function(spectrum, beta + dbeta)
            - log_partition_function(spectrum, beta - dbeta)) / (2 * dbeta)
