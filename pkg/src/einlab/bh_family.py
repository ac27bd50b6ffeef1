"""Static AdS black holes g_m = V^{-1} dr^2 + V dtheta^2 + r^2 g_N.

V(r) = k + r^2 - 2m / r^{n-2}; the horizon r_+ is the largest root of V and
smoothness at the horizon forces theta in [0, beta] with
beta = 4 pi r_+ / (n r_+^2 + k (n-2)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import BelowExtremal, DomainError, NoHorizon
from .geom_core import CohomOneMetric, FiberSpec

DEGENERATE_TOL = 1e-10
HORIZON_MARGIN = 1e-3
_GRID = np.geomspace(1e-4, 1e3, 400)


def _check(n, k):
    if n < 3:
        raise DomainError(f"n must be >= 3, got {n}")
    if k not in (-1, 0, 1):
        raise DomainError(f"k must be -1, 0 or 1, got {k}")


def v_potential(n: int, k: int, m: float, r: float) -> float:
    if not r > 0:
        raise DomainError(f"r must be positive, got {r}")
    return k + r * r - 2.0 * m / r ** (n - 2)


def v_jet(n: int, k: int, m: float, r):
    """(V, V', V'') in closed form; accepts arrays."""
    r = np.asarray(r, dtype=float) if not np.isscalar(r) else float(r)
    v = k + r * r - 2.0 * m / r ** (n - 2)
    v1 = 2.0 * r + 2.0 * m * (n - 2) / r ** (n - 1)
    v2 = 2.0 - 2.0 * m * (n - 2) * (n - 1) / r**n
    return v, v1, v2


def extremal_parameters(n: int) -> tuple[float, float]:
    """(m_-, r_+) of the degenerate k = -1 horizon, closed form."""
    r_plus = math.sqrt((n - 2) / n)
    m_minus = -((n - 2) / n) ** (n / 2) / (n - 2)
    return m_minus, r_plus


def mass_from_horizon(n: int, k: int, r_plus: float) -> float:
    return r_plus ** (n - 2) * (k + r_plus * r_plus) / 2.0


def _critical_radius(n, m):
    # V' = 0 at r^n = -m (n-2); only a minimum, only for m < 0
    if m >= 0:
        return None
    return (-m * (n - 2)) ** (1.0 / n)


def horizon_radius(n: int, k: int, m: float) -> float:
    """Largest positive root of V, polished to ~1e-12 relative."""
    _check(n, k)
    if k == -1:
        m_minus, r_ext = extremal_parameters(n)
        if m < m_minus * (1 + 1e-12) - 1e-15:
            raise BelowExtremal(f"m={m} < m_-({n})={m_minus}")
        if abs(m - m_minus) <= 1e-12 * abs(m_minus):
            return r_ext
    if k >= 0 and m <= 0:
        raise NoHorizon(f"V > 0 on (0, inf) for k={k}, m={m}")

    grid = _GRID
    rc = _critical_radius(n, m)
    if rc is not None:
        grid = np.unique(np.append(grid, rc))
    vals = np.array([v_potential(n, k, m, r) for r in grid])
    # scan from the right for the last sign change
    idx = None
    for i in range(len(grid) - 1, 0, -1):
        if vals[i] > 0 and vals[i - 1] <= 0:
            idx = i
            break
    if idx is None:
        raise NoHorizon(f"no sign change of V for n={n}, k={k}, m={m}")
    lo, hi = grid[idx - 1], grid[idx]
    if vals[idx - 1] == 0:
        return float(lo)
    r = brentq(lambda r: v_potential(n, k, m, r), lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
    for _ in range(3):
        v, v1, _ = v_jet(n, k, m, r)
        if v1 == 0:
            break
        r_new = r - v / v1
        if not lo <= r_new <= hi:
            break
        r = r_new
    return float(r)


def period_beta(n: int, k: int, r_plus: float) -> float:
    """Smoothness period; math.inf for a degenerate horizon."""
    if not r_plus > 0:
        raise DomainError(f"r_plus must be positive, got {r_plus}")
    denom = n * r_plus * r_plus + k * (n - 2)
    if denom < DEGENERATE_TOL:
        return math.inf
    return 4 * math.pi * r_plus / denom


def beta_of_mass(n: int, k: int, m: float) -> float:
    return period_beta(n, k, horizon_radius(n, k, m))


@dataclass(frozen=True)
class BlackHoleParams:
    n: int
    k: int
    m: float

    @property
    def r_plus(self) -> float | None:
        try:
            return horizon_radius(self.n, self.k, self.m)
        except NoHorizon:
            return None

    @property
    def beta(self) -> float | None:
        r = self.r_plus
        return None if r is None else period_beta(self.n, self.k, r)

    @property
    def degenerate(self) -> bool:
        return self.beta == math.inf


@dataclass(frozen=True)
class FoldData:
    """Maximum of beta over the k = +1 family.

    beta0_quoted is the literature closed form 2 pi sqrt((n-2)/n);
    beta0_analytic = 2 pi / sqrt(n (n-2)) is the exact maximum of the period
    formula. The two coincide only at n = 3.
    """

    n: int
    r_fold: float
    m0: float
    beta0: float
    r_fold_analytic: float
    beta0_analytic: float
    beta0_quoted: float

    @property
    def closed_forms_agree(self) -> bool:
        return abs(self.beta0_quoted - self.beta0_analytic) <= 1e-12 * self.beta0_analytic

    def as_record(self) -> dict:
        return {
            "n": self.n,
            "r_fold": self.r_fold,
            "m0": self.m0,
            "beta0": self.beta0,
            "r_fold_analytic": self.r_fold_analytic,
            "beta0_analytic": self.beta0_analytic,
            "beta0_quoted": self.beta0_quoted,
            "closed_forms_agree": self.closed_forms_agree,
        }


def fold_point(n: int) -> FoldData:
    """Golden-section maximization of beta(r_+) for k = +1."""
    _check(n, 1)
    res = minimize_scalar(
        lambda r: -period_beta(n, 1, r),
        bracket=(0.05, 0.5, 5.0),
        method="golden",
        options={"xtol": 1e-10},
    )
    r_fold = float(res.x)
    r_an = math.sqrt((n - 2) / n)
    return FoldData(
        n=n,
        r_fold=r_fold,
        m0=mass_from_horizon(n, 1, r_fold),
        beta0=period_beta(n, 1, r_fold),
        r_fold_analytic=r_an,
        beta0_analytic=2 * math.pi / math.sqrt(n * (n - 2)),
        beta0_quoted=2 * math.pi * math.sqrt((n - 2) / n),
    )


def dbeta_dr(n: int, k: int, r_plus: float) -> float:
    d = n * r_plus**2 + k * (n - 2)
    return 4 * math.pi * (k * (n - 2) - n * r_plus**2) / d**2


def _invert_on(n, k, beta_target, lo, hi):
    g = lambda r: period_beta(n, k, r) - beta_target
    glo, ghi = g(lo), g(hi)
    if glo == 0:
        return lo
    if math.isinf(glo) or glo * ghi < 0:
        return brentq(g, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=300)
    return None


def beta_preimages(n: int, k: int, beta_target: float) -> list[float]:
    """All masses with beta(m) = beta_target, sorted ascending."""
    _check(n, k)
    if not beta_target > 0:
        raise DomainError("beta_target must be positive")
    big = 1e8
    radii = []
    if k == 1:
        fold = fold_point(n)
        if beta_target > fold.beta0:
            return []
        if beta_target == fold.beta0:
            return [fold.m0]
        r_split = fold.r_fold_analytic
        for lo, hi in ((1e-12, r_split), (r_split, big)):
            r = _invert_on(n, k, beta_target, lo, hi)
            if r is not None:
                radii.append(r)
    elif k == 0:
        radii.append(4 * math.pi / (n * beta_target))
    else:
        _, r_ext = extremal_parameters(n)
        # beta decreases from +inf at r_ext to 0
        delta = 1.0
        for _ in range(80):
            if period_beta(n, k, r_ext + delta) > beta_target:
                break
            delta /= 4
        r = _invert_on(n, k, beta_target, r_ext + delta, big)
        if r is not None:
            radii.append(r)
    return sorted(mass_from_horizon(n, k, r) for r in radii)


def _bh_jets(n, k, m):
    def a(r):
        v, v1, v2 = v_jet(n, k, m, r)
        return v**-0.5, -0.5 * v1 * v**-1.5, -0.5 * v2 * v**-1.5 + 0.75 * v1 * v1 * v**-2.5

    def f(r):
        v, v1, v2 = v_jet(n, k, m, r)
        return v**0.5, 0.5 * v1 * v**-0.5, 0.5 * v2 * v**-0.5 - 0.25 * v1 * v1 * v**-1.5

    def h(r):
        return r, 1.0, 0.0

    return a, f, h


def build_metric(n: int, k: int, m: float, r_max: float) -> CohomOneMetric:
    """g_m on [r_+ (1 + 1e-3), r_max] with closed-form derivative jets.

    Hyperbolic space (k = 1, m = 0) has no horizon; its chart starts at r = 0.
    The jets stay valid beyond r_max, which the boundary expansion relies on.
    """
    _check(n, k)
    if k == 1 and m == 0:
        r_lo, beta = 0.0, 2 * math.pi
    else:
        r_plus = horizon_radius(n, k, m)
        r_lo, beta = r_plus * (1 + HORIZON_MARGIN), period_beta(n, k, r_plus)
    if not r_max > r_lo:
        raise DomainError(f"r_max={r_max} must exceed the inner edge {r_lo}")
    a, f, h = _bh_jets(n, k, m)

    def radial_excess(r):
        # V^{-1/2} - 1/r = r^{-1} ((1 + eps)^{-1/2} - 1), eps = k/r^2 - 2m/r^n
        eps = k / r**2 - 2.0 * m / r**n
        return math.expm1(-0.5 * math.log1p(eps)) / r

    return CohomOneMetric(
        n, FiberSpec(n - 1, k), r_lo, r_max, a, f, h, beta,
        label=f"bh(n={n},k={k},m={m})",
        meta={"family": "black_hole", "n": n, "k": k, "m": m},
        radial_excess=radial_excess,
    )


def mass_grid(n: int, k: int, count: int, m_hi: float = 10.0) -> np.ndarray:
    """Non-degenerate masses spanning the family, geometric above the lower edge."""
    if k == -1:
        m_minus, _ = extremal_parameters(n)
        return m_minus + np.geomspace(1e-3, m_hi - m_minus, count)
    return np.geomspace(1e-2, m_hi, count)
