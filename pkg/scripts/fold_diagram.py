"""Tabulate beta(m) along the three black-hole families and locate the fold.

    python3 scripts/fold_diagram.py --n 3 --out fold.csv
"""

import argparse
import csv
import sys

import numpy as np

from einlab import bh_family as bh
from einlab.cli import fmt_float


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--count", type=int, default=60)
    ap.add_argument("--m-hi", type=float, default=10.0)
    ap.add_argument("--out", default=None)
    args = ap.parse_args(argv)

    rows = []
    for k in (-1, 0, 1):
        for m in bh.mass_grid(args.n, k, args.count, args.m_hi):
            r = bh.horizon_radius(args.n, k, float(m))
            rows.append((k, float(m), r, bh.period_beta(args.n, k, r)))

    fold = bh.fold_point(args.n)
    sink = open(args.out, "w", newline="") if args.out else sys.stdout
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(["k", "m", "r_plus", "beta"])
    for k, m, r, b in rows:
        writer.writerow([k, fmt_float(m), fmt_float(r), fmt_float(b)])
    if args.out:
        sink.close()

    print(f"fold (k=+1, n={args.n}): r = {fold.r_fold:.10f}, m0 = {fold.m0:.10f}, beta0 = {fold.beta0:.10f}",
          file=sys.stderr)
    betas = np.array([b for k, _, _, b in rows if k == 1])
    print(f"k=+1 beta range on grid: [{betas.min():.6f}, {betas.max():.6f}]", file=sys.stderr)


if __name__ == "__main__":
    main()
