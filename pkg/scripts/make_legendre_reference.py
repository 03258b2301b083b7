"""Regenerate tests/data/legendre_reference.csv with an mpmath oracle.

P^-m is cross-checked against direct quadrature of the Laplace integral
before anything is written. Q is Hobson's phase-free Q^m, which is (-1)^m
times mpmath's type-3 legenq.
"""

import csv
from pathlib import Path

import mpmath as mp

mp.mp.dps = 40

DEGREES = [complex(-0.5, 0.0), complex(-0.5, 2.515), complex(-0.5, 10.0),
           complex(0.3, 0.0), complex(2.5, 0.0), complex(0.2, 0.7)]
ORDERS = [0, 1, 2, 5]
ARGS = [1.05, 1.5, 3.0, 20.0, 300.0]
OUT = Path(__file__).resolve().parents[1] / "tests" / "data" / "legendre_reference.csv"


def p_minus(nu, m, x):
    return mp.legenp(nu, -m, x, type=3)


def p_minus_quadrature(nu, m, x):
    """Laplace form: Gamma(nu-m+1)/(pi Gamma(nu+1)) int_0^pi (x + s cos t)^nu cos(m t) dt."""
    s = mp.sqrt(x * x - 1)
    integral = mp.quad(lambda t: (x + s * mp.cos(t)) ** nu * mp.cos(m * t), [0, mp.pi])
    return integral * mp.gamma(nu - m + 1) / (mp.pi * mp.gamma(nu + 1))


def q_hat(nu, m, x):
    return (-1) ** m * mp.legenq(nu, m, x, type=3)


def main():
    rows = []
    for nu in DEGREES:
        v = mp.mpc(nu.real, nu.imag)
        for m in ORDERS:
            for x in ARGS:
                xm = mp.mpf(x)
                p = p_minus(v, m, xm)
                pq = p_minus_quadrature(v, m, xm)
                assert abs(p - pq) <= mp.mpf("1e-25") * max(1, abs(p)), (nu, m, x)
                q = q_hat(v, m, xm)
                rows.append([x, nu.real, nu.imag, m, complex(p).real, complex(p).imag,
                             complex(q).real, complex(q).imag])
    OUT.parent.mkdir(parents=True, exist_ok=True)
    with open(OUT, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "nu_re", "nu_im", "m", "Pminus_re", "Pminus_im", "Q_re", "Q_im"])
        for r in rows:
            w.writerow([repr(float(r[0]))] + [f"{float(v):.17g}" for v in r[1:3]] + [r[3]]
                       + [f"{float(v):.17g}" for v in r[4:]])
    print(f"wrote {len(rows)} rows to {OUT}")


if __name__ == "__main__":
    main()
