"""Seeded solver runs on several domains; prints one summary line per setting.

    python scripts/falsification_experiment.py --runs 20 --out results.json
"""

import argparse
import json
import time

from plie import report as rp
from plie.domain import INF, REAL, Interval
from plie.solver import SolverConfig, falsification_suite

SETTINGS = [
    ("[0,1]", Interval(0, 1), None, True),
    ("[0,1]", Interval(0, 1), None, False),
    ("(-2,5)", Interval.open(-2, 5), None, True),
    ("[0,inf)", Interval(0, INF), (0.0, 5.0), True),
    ("(-inf,0]", Interval(-INF, 0), (-5.0, 0.0), True),
    ("R", REAL, (-5.0, 5.0), True),
    ("R", REAL, (-5.0, 5.0), False),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--grid", type=int, default=65)
    ap.add_argument("--out")
    args = ap.parse_args()

    docs = []
    print(f"{'domain':10} {'mode':11} {'success':>8} {'min residual':>13} {'worst dist':>11} {'time':>7}")
    for name, dom, window, inc in SETTINGS:
        t0 = time.perf_counter()
        s = falsification_suite(dom, args.runs, args.seed, SolverConfig(grid_size=args.grid, monotone=inc), window)
        mode = "increasing" if inc else "decreasing"
        print(f"{name:10} {mode:11} {s.success_rate:8.2f} {s.min_residual:13.2e} "
              f"{s.worst_distance:11.2e} {time.perf_counter() - t0:6.1f}s")
        docs.append(rp.falsify_doc(s, window))
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(rp.clean(docs), fh, indent=2, sort_keys=True)


if __name__ == "__main__":
    main()
