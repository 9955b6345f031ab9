"""Reference zeros of q_m(x; t) for the test fixtures.

Builds q_m with exact rational coefficients (t is taken as the exact value of
the double it is given as) and isolates its roots with FLINT's certified
complex root finder. Requires python-flint.

    python3 tools/oracle_zeros.py > crates/core/tests/data/oracle_zeros.json
"""

import json
from fractions import Fraction

from flint import acb_poly, arb, ctx, fmpq, fmpq_poly

CASES = [
    ("hermite", {}, 40, 0.05),
    ("hermite", {}, 100, 0.5),
    ("charlier", {"a": 3.0}, 60, 5.0),
    ("charlier", {"a": 3.0}, 100, 0.5),
    ("lommel", {"nu": 3.0}, 100, 0.05),
    ("hermite", {}, 70, 1e-5),
    ("charlier", {"a": 3.0}, 40, 1e-6),
]


def q(family, params, m, t):
    t = fmpq(*Fraction(t).as_integer_ratio())
    x = fmpq_poly([0, 1])

    def coeffs(n):
        if family == "hermite":
            return fmpq(1, 2), fmpq(0), fmpq(n), fmpq(1, max(n, 1))
        if family == "charlier":
            a = fmpq(*Fraction(params["a"]).as_integer_ratio())
            return -a, n + a, fmpq(-n), fmpq(1, max(n, 1))
        nu = fmpq(*Fraction(params["nu"]).as_integer_ratio())
        h = fmpq(1, 2) / (n + nu)
        return h, fmpq(0), h, fmpq(1)

    prev, cur, total, weight = fmpq_poly([0]), fmpq_poly([1]), fmpq_poly([1]), fmpq(1)
    for n in range(m):
        a, b, c, _ = coeffs(n)
        if n == 0:
            c = fmpq(0)
        prev, cur = cur, ((x - b) * cur - c * prev) / a
        weight *= coeffs(n + 1)[3] * t
        total += weight * cur
    return total


def roots(poly):
    for prec in (256, 1024, 4096, 16384):
        ctx.prec = prec
        try:
            return acb_poly(poly).roots(tol=arb(2) ** -80)
        except ValueError:
            continue
    raise RuntimeError("root isolation failed")


def main():
    out = []
    for family, params, m, t in CASES:
        zs = sorted((float(z.real.mid()), float(z.imag.mid())) for z in roots(q(family, params, m, t)))
        out.append({"family": family, "params": params, "m": m, "t": t, "zeros": zs})
    print("[\n" + ",\n".join(json.dumps(c) for c in out) + "\n]")


if __name__ == "__main__":
    main()
