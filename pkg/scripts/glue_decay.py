"""Seam residual and matching width of the glued metric as the neck R grows.

    python3 scripts/glue_decay.py --n 3 4 --R 2 3 4 5 6
"""

import argparse
import math

from einlab import cusp_glue as cg


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[3, 4])
    ap.add_argument("--beta", type=float, default=1.0)
    ap.add_argument("--R", type=float, nargs="+", default=[2.0, 3.0, 4.0, 5.0])
    ap.add_argument("--collar-width", type=float, default=1.0)
    args = ap.parse_args(argv)

    for n in args.n:
        print(f"n = {n}")
        print(f"  {'R':>4} {'alpha':>11} {'sup collar':>11} {'outside':>9}")
        for R in args.R:
            g = cg.glue(cg.GlueConfig(n, args.beta, R, collar_width=args.collar_width))
            print(f"  {R:4g} {g.alpha:11.4e} {g.residual_sup:11.4e} {g.residual_outside:9.1e}")
        res = cg.residual_decay_fit(n, args.beta, args.R, collar_width=args.collar_width)
        alp = cg.alpha_decay_fit(n, args.beta, args.R)
        print(f"  residual slope {res.slope:.4f} (ratio to -sqrt(n): {res.slope / -math.sqrt(n):.4f})")
        print(f"  alpha slope    {alp.slope:.4f} (ratio to -2 sqrt(n): {alp.slope / (-2 * math.sqrt(n)):.4f})")


if __name__ == "__main__":
    main()
