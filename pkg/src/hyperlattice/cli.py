"""Command-line front end: lattice generation, spectra, Green functions, h scans.

Exit codes: 0 success, 2 usage error, 3 numerical precondition violated
(omega on the spectrum), 1 anything else. Set HYPERLATTICE_THREADS to cap
BLAS worker threads.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import re
import sys

import numpy as np

from .continuum_ops import (expansion_scan, modulus_squared_function, plane_wave_function,
                            radial_cosine_function, real_part_function)
from .greens import NearSpectrumError, compare_green
from .lattice import MAX_RINGS, NonHyperbolicError, effective_radius, generate_lattice, total_sites
from .spectra import (DENSE_LIMIT, asymptotic_energy, continuum_energy, continuum_momenta,
                      graph_spectrum_dense, graph_spectrum_lanczos)
from .specfun import Momentum

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
THREADS_ENV = "HYPERLATTICE_THREADS"

_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_REAL = re.compile(rf"[+-]?{_NUM}")
_IMAG = re.compile(rf"[+-]?{_NUM}i")
_FULL = re.compile(rf"(?P<re>[+-]?{_NUM})(?P<im>[+-]{_NUM})i")


class UsageError(Exception):
    pass


def parse_complex(text: str) -> complex:
    """Parse 'a', 'a+bi', 'a-bi' or 'bi' (no spaces, scientific notation allowed)."""
    if _REAL.fullmatch(text):
        return complex(float(text), 0.0)
    if _IMAG.fullmatch(text):
        return complex(0.0, float(text[:-1]))
    m = _FULL.fullmatch(text)
    if m is None:
        raise argparse.ArgumentTypeError(f"bad complex literal {text!r} (use a+bi)")
    return complex(float(m.group("re")), float(m.group("im")))


def parse_h_list(text: str) -> list[float]:
    items = [t for t in text.split(",") if t.strip()]
    if not items:
        raise argparse.ArgumentTypeError("empty h list")
    try:
        return [float(t) for t in items]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _info(msg: str, args) -> None:
    # keep stdout clean when it carries the data
    stream = sys.stderr if getattr(args, "out", None) == "-" else sys.stdout
    print(msg, file=stream)


def _check_rings(rings: int, upper: int = MAX_RINGS) -> None:
    if not 1 <= rings <= upper:
        raise UsageError(f"--rings must lie in [1, {upper}]")


# ------------------------------------------------------------- subcommands


def cmd_generate(args) -> int:
    _check_rings(args.rings)
    lat = generate_lattice(args.p, args.rings)
    text = "".join(f"{_fmt(z.real)} {_fmt(z.imag)}\n" for z in lat.sites)
    _emit(text, args.out)
    if args.edges:
        lat.write_edges(args.edges)
    _info(f"N={lat.N} L={lat.L:.6f} d0={lat.d0:.6f} h={lat.h:.6f}", args)
    return EXIT_OK


def _continuum_lowest(rings: int, levels: int) -> list[float]:
    L = effective_radius(total_sites(rings))
    vals = []
    for m in range(levels):
        e = continuum_energy(continuum_momenta(L, m, count=levels))
        vals.extend(np.repeat(e, 1 if m == 0 else 2))
    return sorted(float(v) for v in vals)[:levels]


def _graph_lowest(rings: int, levels: int, p: int) -> list[float]:
    lat = generate_lattice(p, rings)
    if levels >= lat.N:
        raise UsageError(f"--levels must be below N = {lat.N}")
    if lat.N <= DENSE_LIMIT:
        spec = graph_spectrum_dense(lat)
    else:
        spec = graph_spectrum_lanczos(lat, count=levels)
    return [float(v) for v in spec.values[:levels]]


def cmd_spectrum(args) -> int:
    if args.levels < 1:
        raise UsageError("--levels must be positive")
    upper = 10 if args.mode == "continuum" else MAX_RINGS
    _check_rings(args.rings, upper)
    if args.asymptotic and args.levels > 2:
        raise UsageError("asymptotic formula covers levels 0 and 1 only")
    rec: dict = {"p": args.p, "rings": args.rings, "mode": args.mode,
                 "N": total_sites(args.rings)}
    if args.mode in ("graph", "both"):
        if args.p != 7 and args.mode == "both":
            raise UsageError("continuum comparison is for p = 7")
        rec["graph"] = _graph_lowest(args.rings, args.levels, args.p)
    if args.mode in ("continuum", "both"):
        rec["continuum"] = _continuum_lowest(args.rings, args.levels)
    if args.mode == "both":
        rec["difference"] = [g - c for g, c in zip(rec["graph"], rec["continuum"])]
    if args.asymptotic:
        rec["asymptotic"] = [asymptotic_energy(args.rings, n) for n in range(args.levels)]
    _emit(json.dumps(rec, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_green(args) -> int:
    _check_rings(args.rings, 8)
    if args.bins < 1:
        raise UsageError("--bins must be positive")
    lat = generate_lattice(7, args.rings)
    if args.source is not None:
        if not 0 <= args.source < lat.N:
            raise UsageError(f"--source must lie in [0, {lat.N})")
        src = args.source
    else:
        ring = np.flatnonzero(lat.ring_of == args.source_ring)
        if len(ring) == 0:
            raise UsageError(f"ring {args.source_ring} is empty at {args.rings} rings")
        src = int(ring[0])
    cmp_ = compare_green(lat, args.omega, src, bins=args.bins)
    _emit(cmp_.to_csv(), args.out)
    if args.dump:
        with open(args.dump, "w") as fh:
            fh.write(cmp_.scatter_csv())
    ok = cmp_.within_one_std()
    _info(f"source={src} lambda={cmp_.lam:.6g} bins_within_std={int(ok.sum())}/{len(ok)}", args)
    return EXIT_OK


_FUNCTIONS = {
    "re_z": real_part_function,
    "abs_z_squared": modulus_squared_function,
    "radial_cosine": radial_cosine_function,
    "plane_wave": lambda: plane_wave_function(Momentum(2.0, 0.3)),
}


def cmd_scan_h(args) -> int:
    _check_rings(args.rings, 8)
    lat = generate_lattice(7, args.rings)
    # the physical h is usually quoted to six decimals, so allow that rounding
    if any(not 0.0 < h <= lat.h + 5e-7 for h in args.h):
        raise UsageError(f"every h must lie in (0, {lat.h:.6f}]")
    if len(lat.interior) == 0:
        raise UsageError("lattice has no interior sites")
    rep = expansion_scan(_FUNCTIONS[args.function](), lat, args.h)
    _emit(rep.to_csv(), args.out)
    if rep.fit_valid:
        _info(f"slope_quadratic={rep.slope_quadratic:.4f} slope_cubic={rep.slope_cubic:.4f}", args)
    else:
        _info("slopes not fitted (need >= 4 h values spanning a decade)", args)
    return EXIT_OK


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hyperlattice",
                                 description="Hyperbolic {p,3} lattices and their continuum limit.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write site coordinates")
    g.add_argument("--p", type=int, default=7)
    g.add_argument("--rings", type=int, required=True)
    g.add_argument("--out", default=None, help="coordinate file, '-' for stdout")
    g.add_argument("--edges", default=None, help="edge-list CSV")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("spectrum", help="graph and continuum energies")
    s.add_argument("--p", type=int, default=7)
    s.add_argument("--rings", type=int, required=True)
    s.add_argument("--mode", choices=["graph", "continuum", "both"], default="both")
    s.add_argument("--levels", type=int, default=2)
    s.add_argument("--asymptotic", action="store_true")
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_spectrum)

    r = sub.add_parser("green", help="graph vs continuum Green function")
    r.add_argument("--rings", type=int, default=6)
    r.add_argument("--omega", type=parse_complex, required=True)
    r.add_argument("--source-ring", type=int, default=2)
    r.add_argument("--source", type=int, default=None, help="explicit site index")
    r.add_argument("--bins", type=int, default=30)
    r.add_argument("--out", default=None)
    r.add_argument("--dump", default=None, help="per-site scatter CSV")
    r.set_defaults(func=cmd_green)

    h = sub.add_parser("scan-h", help="residuals of the small-h expansion")
    h.add_argument("--rings", type=int, default=4)
    h.add_argument("--h", type=parse_h_list, required=True)
    h.add_argument("--function", choices=sorted(_FUNCTIONS), default="radial_cosine")
    h.add_argument("--out", default=None)
    h.set_defaults(func=cmd_scan_h)
    return ap


def _thread_limit():
    n = os.environ.get(THREADS_ENV)
    if not n:
        return contextlib.nullcontext()
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        return contextlib.nullcontext()
    return threadpool_limits(limits=int(n))


def _attach_values(argv: list[str]) -> list[str]:
    # argparse mistakes '-2.5+0.1i' for an option, so glue it onto its flag
    out, it = [], iter(argv)
    for tok in it:
        if tok == "--omega":
            out.append(f"--omega={next(it, '')}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(_attach_values(argv))
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        with _thread_limit():
            return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NonHyperbolicError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NearSpectrumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
