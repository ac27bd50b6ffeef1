"""Acceptance criteria, one check each; prints a PASS/FAIL line per criterion.

Run directly for a summary table:  python3 tests/test_acceptance.py
"""

import math
import sys
import tempfile
from pathlib import Path

import numpy as np
import pytest

from einlab import bh_family as bh
from einlab import cli
from einlab import cusp_glue as cg
from einlab import fg_expansion as fg
from einlab.geom_core import (
    convergence_order,
    fd_ricci_oracle,
    hyperbolic_metric,
    max_einstein_residual,
    ricci_cohom_one,
)


def report(number, title, passed, detail):
    print(f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d} {title}: {detail}")
    return passed


def criterion_1():
    worst = 0.0
    for n in (3, 4, 5):
        for k in (-1, 0, 1):
            for m in bh.mass_grid(n, k, 5):
                metric = bh.build_metric(n, k, float(m), 10.0)
                xs = np.linspace(metric.x_lo, metric.x_hi, 22)[1:-1]
                worst = max(worst, max_einstein_residual(metric, xs))
    return report(1, "Einstein exactness", worst < 1e-8, f"sup |Ric + n g| = {worst:.2e} (< 1e-8)")


def criterion_2():
    steps = (1e-2, 5e-3, 2.5e-3)
    families = {
        "hyperbolic": hyperbolic_metric(3, 0.2, 5.0),
        "black hole": bh.build_metric(3, 1, 1.0, 5.0),
        "tube": cg.tube_metric(3, 0.3, 1.5),
    }
    orders = []
    for metric in families.values():
        for x in np.linspace(metric.x_lo, metric.x_hi, 7)[1:-1]:
            exact = ricci_cohom_one(metric, float(x)).as_array()
            errs = [np.max(np.abs(fd_ricci_oracle(metric, float(x), h).as_array() - exact)) for h in steps]
            orders.append(convergence_order(steps, errs))
    lo, hi = min(orders), max(orders)
    ok = 1.8 <= lo and hi <= 2.2
    return report(2, "Oracle equivalence", ok, f"order in [{lo:.3f}, {hi:.3f}] over {len(orders)} points (2.0 +- 0.2)")


def criterion_3():
    worst = 0.0
    for n in range(3, 8):
        m, r = bh.extremal_parameters(n)
        v, v1, _ = bh.v_jet(n, -1, m, r)
        worst = max(worst, abs(v), abs(v1))
    return report(3, "Extremal identities", worst < 1e-12, f"max(|V|, |V'|) at r_+ = {worst:.2e} (< 1e-12)")


def criterion_4():
    fold = bh.fold_point(3)
    closed = 2 * math.pi / math.sqrt(3)
    gap = abs(closed - fold.beta0)
    two = bh.beta_preimages(3, 1, 3.0)
    err = max(abs(bh.beta_of_mass(3, 1, m) - 3.0) for m in two) if two else math.inf
    none = bh.beta_preimages(3, 1, fold.beta0 + 0.1)
    ok = gap < 1e-6 and len(two) == 2 and err < 1e-9 and len(none) == 0
    detail = (f"|2pi/sqrt3 - max beta| = {gap:.1e}; beta=3.0 -> {len(two)} masses "
              f"(beta error {err:.1e}); beta0+0.1 -> {len(none)} masses")
    return report(4, "Fold/non-uniqueness", ok, detail)


def criterion_5():
    violations = 0
    for k in (0, -1):
        for n in (3, 4, 5):
            betas = np.array([bh.beta_of_mass(n, k, m) for m in bh.mass_grid(n, k, 50)])
            violations += int(np.sum(np.diff(betas) >= 0))
    return report(5, "Monotonicity", violations == 0, f"{violations} violations over k in {{0,-1}}, n in {{3,4,5}}, 50 masses")


def criterion_6():
    slopes = {}
    for label, (n, k, m) in {"AdS-Schwarzschild n=3": (3, 1, 1.0), "toral n=4": (4, 0, 8.0)}.items():
        metric = bh.build_metric(n, k, m, 10.0)
        chart = fg.geodesic_defining_function(metric, 5.0)
        slopes[label] = fg.curvature_falloff_exponent(metric, chart).slope
    ok = all(abs(s - 2.0) <= 0.05 for s in slopes.values())
    detail = ", ".join(f"{k}: {v:.4f}" for k, v in slopes.items()) + " (target 2.00 +- 0.05)"
    return report(6, "Curvature falloff", ok, detail)


def criterion_7():
    metric = bh.build_metric(3, 1, 1.0, 10.0)
    base = fg.fg_series(metric, 5.0, fg.FGGrid())
    fine = fg.fg_series(metric, 5.0, fg.FGGrid().refined(2))
    g1, g1f = np.max(np.abs(base.g(1))), np.max(np.abs(fine.g(1)))
    tr, trf = abs(base.trace_gn), abs(fine.trace_gn)
    ok = g1 < 1e-6 and tr < 1e-4 and g1f < g1 and trf < tr
    detail = f"|g_(1)| {g1:.1e} -> {g1f:.1e}; |tr g_(3)| {tr:.1e} -> {trf:.1e} under 2x refinement"
    return report(7, "FG constraints", ok, detail)


def criterion_8():
    ok, parts = True, []
    for n in (3, 4):
        em = cg.extremal_metric(n, 1.0, (-8.0, 3.0), gauge="cusp")
        rate, amp = cg.v_asymptotic_fit(em)
        conv = cg.curvature_convergence_rate(em).slope
        ref = cg.extremal_metric(n, 1.0, (-8.0, 3.0), gauge="reference")
        _, amp_ref = cg.v_asymptotic_fit(ref)
        good = (abs(rate / (2 * math.sqrt(n)) - 1) <= 0.01 and abs(amp / n - 1) <= 0.05
                and abs(conv / math.sqrt(n) - 1) <= 0.05)
        ok &= good
        parts.append(f"n={n}: rate/2sqrt(n)={rate / (2 * math.sqrt(n)):.5f}, amplitude/n={amp / n:.4f} "
                     f"(reference gauge {amp_ref / n:.3f}), conv/sqrt(n)={conv / math.sqrt(n):.4f}")
    return report(8, "Cusp rates", ok, "; ".join(parts))


def criterion_9():
    ok, parts = True, []
    for n in (3, 4):
        fit = cg.residual_decay_fit(n, 1.0, [2.0, 3.0, 4.0, 5.0])
        outside = max(cg.glue(cg.GlueConfig(n, 1.0, R)).residual_outside for R in (2.0, 5.0))
        good = abs(fit.slope / -math.sqrt(n) - 1) <= 0.10 and outside < 1e-8
        ok &= good
        parts.append(f"n={n}: slope/(-sqrt n)={fit.slope / -math.sqrt(n):.4f}, outside collar {outside:.1e}")
    return report(9, "Glue residual decay", ok, "; ".join(parts))


def criterion_10():
    worst = 0.0
    for n in (3, 4, 5):
        xs = np.linspace(-4.0, 4.0, 20)
        worst = max(
            worst,
            max_einstein_residual(cg.cusp_limit_metric(n, 1.0), xs),
            max_einstein_residual(cg.toral_cusp_metric(n), xs),
            max_einstein_residual(cg.tube_metric(n, 0.1, 5.0), xs),
        )
    return report(10, "Exact limits", worst < 1e-12, f"max residual of g_inf, g_C, g_D = {worst:.1e} (< 1e-12)")


def criterion_11():
    sweeps = [
        ["bh-preimages", "n=3", "k=1", "--axis", "beta", "--values", "2.0,2.4,2.8,3.2,3.6,3.7"],
        ["verify", "n=4", "k=-1", "--axis", "m", "--values=-0.05,0,0.5,1,2,4,8,16"],
    ]
    identical = True
    with tempfile.TemporaryDirectory() as tmp:
        for i, argv in enumerate(sweeps):
            for fmt in ("csv", "json"):
                outputs = []
                for workers in (1, 8, 1):
                    out = Path(tmp) / f"s{i}_{fmt}_{workers}_{len(outputs)}"
                    code = cli.main(["sweep", *argv, "--format", fmt, "--workers", str(workers), "--out", str(out)])
                    identical &= code == 0
                    outputs.append(out.read_bytes())
                identical &= len(set(outputs)) == 1
    return report(11, "Determinism", identical, "sweep outputs byte-identical for workers 1 and 8 (csv and json)")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11]


@pytest.mark.parametrize("check", CRITERIA, ids=[f"criterion_{i + 1}" for i in range(len(CRITERIA))])
def test_acceptance(check, capsys):
    with capsys.disabled():
        print()
        passed = check()
    assert passed


if __name__ == "__main__":
    results = [check() for check in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria pass")
    sys.exit(0 if all(results) else 1)
