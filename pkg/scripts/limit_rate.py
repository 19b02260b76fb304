"""How fast g^(n+3)(x) / b_n approaches -g^2(x)/2 + g(x) - x/2.

The error is exactly ((n+3)/2 (g^2(x) - x) + x) / b_n, so it decays like
n 2^-n.  The table compares the measured error with that formula.

    python scripts/limit_rate.py --n-max 40
"""

import argparse

from plie.algebra import coeff_table, limit_functional
from plie.domain import Affine

MAPS = [("x", Affine(1.0, 0.0)), ("x+1", Affine(1.0, 1.0)), ("-2*x+1", Affine(-2.0, 1.0))]


def predicted(g, x, n, b):
    g1 = g.slope * x + g.intercept
    g2 = g.slope * g1 + g.intercept
    return abs(((n + 3) / 2 * (g2 - x) + x) / b)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-max", type=int, default=40)
    ap.add_argument("--x", type=float, default=-2.0)
    ap.add_argument("--tol", type=float, default=1e-6)
    args = ap.parse_args()

    table = coeff_table(args.n_max)
    print(f"x = {args.x}")
    print(f"{'n':>3} " + " ".join(f"{name:>22}" for name, _ in MAPS))
    first = {}
    for n in range(0, args.n_max + 1, 2):
        cells = []
        for name, g in MAPS:
            rep = limit_functional(g, args.x, n)
            err = abs(rep.lhs_sequence[n] - rep.rhs)
            cells.append(f"{err:10.2e} ({predicted(g, args.x, n, table[n].b):9.2e})")
            if err <= args.tol and name not in first:
                first[name] = n
        print(f"{n:3d} " + " ".join(f"{c:>22}" for c in cells))
    print("measured (predicted)")
    for name, _ in MAPS:
        print(f"first even n with error <= {args.tol:g} for g = {name}: {first.get(name, 'none')}")


if __name__ == "__main__":
    main()
