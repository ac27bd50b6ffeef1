"""Boundary-expansion coefficients of black holes across dimensions and grids.

    python3 scripts/fg_table.py --n 3 4 5 --refine 1 2 4
"""

import argparse

import numpy as np

from einlab import bh_family as bh
from einlab import fg_expansion as fg
from einlab.errors import EinlabError


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[3, 4, 5])
    ap.add_argument("--k", type=int, default=1)
    ap.add_argument("--m", type=float, default=1.0)
    ap.add_argument("--r0", type=float, default=5.0)
    ap.add_argument("--refine", type=float, nargs="+", default=[1.0, 2.0])
    args = ap.parse_args(argv)

    print(f"{'n':>3} {'grid':>5} {'|g1|':>10} {'tr g_n':>11} {'g_n theta':>12} {'g_n fiber':>12} {'cond':>9}")
    for n in args.n:
        metric = bh.build_metric(n, args.k, args.m, max(10.0, 2 * args.r0))
        for q in args.refine:
            grid = fg.FGGrid() if q == 1 else fg.FGGrid().refined(q)
            try:
                s = fg.fg_series(metric, args.r0, grid)
            except EinlabError as exc:
                print(f"{n:>3} {q:>5g} failed: {exc}")
                continue
            g1 = float(np.max(np.abs(s.g(1))))
            gn = s.g(n)
            print(f"{n:>3} {q:>5g} {g1:10.2e} {s.trace_gn:11.2e} {gn[0]:12.6f} {gn[1]:12.6f} {s.condition:9.1e}")


if __name__ == "__main__":
    main()
