"""Curvature of cohomogeneity-one metrics.

Every metric in the package is of the form

    g = a(x)^2 dx^2 + f(x)^2 dtheta^2 + h(x)^2 g_N

with (N, g_N) a closed constant-curvature space of sectional curvature k.
Sign convention: hyperbolic space has sectional curvature -1, so the
Einstein equation reads Ric = -n g on an (n+1)-manifold.

Two independent routes are provided:

* :func:`ricci_cohom_one` uses the doubly-warped-product reduction and the
  closed-form derivative jets carried by the metric.
* :func:`fd_ricci_oracle` assembles the full metric matrix in explicit
  coordinates (x, theta, y_1..y_{n-1}) and runs Christoffel symbols and the
  Riemann tensor through centered finite differences of the components.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, EvaluationError, StepError

Jet = Callable[[float], tuple[float, float, float]]
"""A scalar function returning (value, first derivative, second derivative)."""


MODEL_NAMES = {1: "unit round sphere", 0: "flat torus", -1: "unit hyperbolic form"}


@dataclass(frozen=True)
class FiberSpec:
    """Closed constant-curvature fiber (N^{n-1}, g_N) with sec = k.

    Such a fiber satisfies Ric(g_N) = k (n-2) g_N exactly.
    """

    dim: int
    k: int

    def __post_init__(self):
        if self.dim < 2:
            raise DomainError(f"fiber dimension must be >= 2, got {self.dim}")
        if self.k not in (-1, 0, 1):
            raise DomainError(f"fiber curvature sign must be -1, 0 or 1, got {self.k}")

    @property
    def n(self) -> int:
        return self.dim + 1

    @property
    def model(self) -> str:
        return MODEL_NAMES[self.k]

    @property
    def einstein_constant(self) -> float:
        return float(self.k * (self.dim - 1))

    def chart_metric(self, y: np.ndarray) -> np.ndarray:
        """Model metric in the conformally flat chart 4|dy|^2 / (1 + k|y|^2)^2.

        The chart covers the sphere minus a point (stereographic), the
        torus locally, and the ball model of hyperbolic space (|y| < 1).
        """
        y = np.asarray(y, dtype=float)
        denom = 1.0 + self.k * float(y @ y)
        if denom <= 0:
            raise DomainError("point outside the hyperbolic ball chart")
        return (4.0 / denom**2) * np.eye(self.dim)

    def default_point(self) -> np.ndarray:
        # off-origin so no chart symmetry hides truncation errors
        return 0.15 * np.arange(1, self.dim + 1) / self.dim


def constant_jet(c: float) -> Jet:
    c = float(c)
    return lambda x: (c, 0.0, 0.0)


def fd_jet(func: Callable[[float], float], step: float) -> Jet:
    """Second-order centered-difference jet for a value-only function."""
    if step <= 0:
        raise StepError(f"step must be positive, got {step}")

    def jet(x: float) -> tuple[float, float, float]:
        fm, f0, fp = func(x - step), func(x), func(x + step)
        return f0, (fp - fm) / (2 * step), (fp - 2 * f0 + fm) / step**2

    return jet


def _scaled_jet(jet: Jet, c: float) -> Jet:
    def scaled(x):
        v, d1, d2 = jet(x)
        return c * v, c * d1, c * d2

    return scaled


@dataclass(frozen=True)
class CohomOneMetric:
    """g = a^2 dx^2 + f^2 dtheta^2 + h^2 g_N on [x_lo, x_hi] x S^1 x N."""

    n: int
    fiber: FiberSpec
    x_lo: float
    x_hi: float
    a: Jet
    f: Jet
    h: Jet
    theta_length: float
    label: str = ""
    meta: dict = field(default_factory=dict, compare=False)
    radial_excess: Callable[[float], float] | None = field(default=None, compare=False)
    """Optional cancellation-free evaluation of a - h'/h (used near infinity)."""

    def __post_init__(self):
        if self.n < 3:
            raise DomainError(f"n must be >= 3, got {self.n}")
        if self.fiber.dim != self.n - 1:
            raise DomainError(f"fiber dimension {self.fiber.dim} != n - 1 = {self.n - 1}")
        if not self.x_lo < self.x_hi:
            raise DomainError("empty domain")
        if not self.theta_length > 0:
            raise DomainError("theta_length must be positive")

    @classmethod
    def from_values(cls, n, fiber, x_lo, x_hi, a, f, h, theta_length, step=None, label=""):
        """Build from value-only callables; derivatives by centered differences.

        The default step is 1e-4 times the domain length.
        """
        if step is None:
            step = 1e-4 * (x_hi - x_lo)
        return cls(n, fiber, x_lo, x_hi, fd_jet(a, step), fd_jet(f, step),
                   fd_jet(h, step), theta_length, label=label)

    @property
    def length(self) -> float:
        return self.x_hi - self.x_lo

    def check_interior(self, x: float, margin: float = 0.0) -> None:
        if not (self.x_lo + margin < x < self.x_hi - margin):
            raise DomainError(
                f"x={x!r} not inside ({self.x_lo + margin!r}, {self.x_hi - margin!r})"
            )

    def jets(self, x: float):
        out = (self.a(x), self.f(x), self.h(x))
        if not all(math.isfinite(v) for jet in out for v in jet):
            raise EvaluationError(f"non-finite metric jet at x={x!r}: {out}")
        return out

    def values(self, x: float) -> tuple[float, float, float]:
        return self.a(x)[0], self.f(x)[0], self.h(x)[0]

    def scaled(self, c: float) -> "CohomOneMetric":
        """The metric c^2 g (fiber g_N unchanged, all warps multiplied by c)."""
        return replace(
            self,
            a=_scaled_jet(self.a, c),
            f=_scaled_jet(self.f, c),
            h=_scaled_jet(self.h, c),
            label=f"{c}^2*{self.label}",
            radial_excess=None,
        )

    def restricted(self, x_lo: float, x_hi: float) -> "CohomOneMetric":
        return replace(self, x_lo=x_lo, x_hi=x_hi)

    def circle_length(self, x: float) -> float:
        return self.theta_length * self.f(x)[0]

    def coordinate_metric(self, p: np.ndarray) -> np.ndarray:
        """Full (n+1)x(n+1) metric matrix at coordinates p = (x, theta, y)."""
        a, f, h = self.values(float(p[0]))
        g = np.zeros((self.n + 1, self.n + 1))
        g[0, 0] = a * a
        g[1, 1] = f * f
        g[2:, 2:] = h * h * self.fiber.chart_metric(p[2:])
        return g


@dataclass(frozen=True)
class CurvatureReport:
    """Curvature at one point, in a g-orthonormal frame.

    ricci_blocks = (Ric(e_x, e_x), Ric(e_theta, e_theta), fiber eigenvalue);
    sectional = (x^theta, x^fiber, theta^fiber, fiber^fiber).
    """

    x: float
    ricci_blocks: tuple[float, float, float]
    einstein_residual: float
    sectional: tuple[float, float, float, float]
    off_diagonal: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array(self.ricci_blocks + self.sectional)


def warped_sectional(n, k, a, f, h):
    """The four plane curvatures from jets (value, d/dx, d2/dx2) of a, f, h.

    Works elementwise on numpy arrays.
    """
    a0, a1, _ = a
    f0, f1, f2 = f
    h0, h1, h2 = h
    # D = a^{-1} d/dx is the unit-speed derivative along x
    Df = f1 / a0
    Dh = h1 / a0
    DDf = f2 / a0**2 - a1 * f1 / a0**3
    DDh = h2 / a0**2 - a1 * h1 / a0**3
    k_xt = -DDf / f0
    k_xn = -DDh / h0
    k_tn = -Df * Dh / (f0 * h0)
    k_nn = (k - Dh * Dh) / h0**2
    return k_xt, k_xn, k_tn, k_nn


def ricci_from_sectional(n, sec):
    k_xt, k_xn, k_tn, k_nn = sec
    d = n - 1
    ric_x = k_xt + d * k_xn
    ric_t = k_xt + d * k_tn
    ric_n = k_xn + k_tn + (d - 1) * k_nn
    return ric_x, ric_t, ric_n


def ricci_cohom_one(metric: CohomOneMetric, x: float) -> CurvatureReport:
    """Ricci, sectional curvatures and |Ric + n g| from the warped-product formulas."""
    metric.check_interior(x)
    a, f, h = metric.jets(x)
    sec = warped_sectional(metric.n, metric.fiber.k, a, f, h)
    ric = ricci_from_sectional(metric.n, sec)
    resid = max(abs(r + metric.n) for r in ric)
    vals = tuple(float(v) for v in ric)
    sec = tuple(float(v) for v in sec)
    if not all(math.isfinite(v) for v in vals + sec):
        raise EvaluationError(f"non-finite curvature at x={x!r}")
    return CurvatureReport(float(x), vals, float(resid), sec)


# -- finite-difference oracle ------------------------------------------------


def _christoffel(gfun, p, step):
    dim = p.size
    g = gfun(p)
    dg = np.empty((dim, dim, dim))
    for c in range(dim):
        e = np.zeros(dim)
        e[c] = step
        dg[c] = (gfun(p + e) - gfun(p - e)) / (2 * step)
    ginv = np.linalg.inv(g)
    # Gamma^l_{ab} = 1/2 g^{lc} (d_a g_{cb} + d_b g_{ca} - d_c g_{ab})
    lower = 0.5 * (np.einsum("acb->cab", dg) + np.einsum("bca->cab", dg) - dg)
    return np.einsum("lc,cab->lab", ginv, lower)


def riemann_fd(gfun: Callable[[np.ndarray], np.ndarray], p: np.ndarray, step: float):
    """(0,4) Riemann tensor R_{lsmv} = g_{le} R^e_{smv} by nested centered differences.

    R^l_{smv} = d_m Gamma^l_{vs} - d_v Gamma^l_{ms}
                + Gamma^l_{me} Gamma^e_{vs} - Gamma^l_{ve} Gamma^e_{ms}.
    Returns (metric, Riemann, Ricci) at p.
    """
    p = np.asarray(p, dtype=float)
    dim = p.size
    gam = _christoffel(gfun, p, step)
    dgam = np.empty((dim, dim, dim, dim))
    for c in range(dim):
        e = np.zeros(dim)
        e[c] = step
        dgam[c] = (_christoffel(gfun, p + e, step) - _christoffel(gfun, p - e, step)) / (2 * step)
    # dgam[m, l, v, s] = d_m Gamma^l_{vs}
    r_up = (
        np.einsum("mlvs->lsmv", dgam)
        - np.einsum("vlms->lsmv", dgam)
        + np.einsum("lme,evs->lsmv", gam, gam)
        - np.einsum("lve,ems->lsmv", gam, gam)
    )
    g = gfun(p)
    riem = np.einsum("le,esmv->lsmv", g, r_up)
    ric = np.einsum("lslv->sv", r_up)
    return g, riem, ric


def _sectional_from_riemann(g, riem, i, j):
    # K(d_i, d_j) = g(R(d_i, d_j) d_j, d_i) / |d_i ^ d_j|^2 = R_{i j i j}
    return riem[i, j, i, j] / (g[i, i] * g[j, j] - g[i, j] ** 2)


def fd_ricci_oracle(metric: CohomOneMetric, x: float, step: float, y=None) -> CurvatureReport:
    """Curvature by brute-force finite differences of the full metric matrix.

    Uses only the values of a, f, h (never their derivative jets).
    """
    if not step > 0:
        raise StepError(f"step must be positive, got {step}")
    metric.check_interior(x, margin=2 * step)
    if y is None:
        y = metric.fiber.default_point()
    p = np.concatenate(([x, 0.0], np.asarray(y, dtype=float)))
    g, riem, ric = riemann_fd(metric.coordinate_metric, p, step)

    # orthonormalize with the Cholesky factor g = L L^T
    lchol = np.linalg.cholesky(g)
    linv = np.linalg.inv(lchol)
    ric_on = linv @ ric @ linv.T
    ric_on = 0.5 * (ric_on + ric_on.T)
    eig = np.linalg.eigvalsh(ric_on)
    resid = float(np.max(np.abs(eig + metric.n)))

    diag = np.diag(ric_on)
    blocks = (float(diag[0]), float(diag[1]), float(np.mean(diag[2:])))
    off = ric_on - np.diag(diag)
    scale = max(1.0, float(np.max(np.abs(diag))))
    sec = tuple(
        float(_sectional_from_riemann(g, riem, i, j)) for i, j in ((0, 1), (0, 2), (1, 2), (2, 3))
    )
    return CurvatureReport(float(x), blocks, resid, sec, off_diagonal=float(np.max(np.abs(off)) / scale))


def richardson_oracle(metric: CohomOneMetric, x: float, step: float) -> np.ndarray:
    """Oracle curvature vector extrapolated from steps h and h/2 (O(h^4))."""
    coarse = fd_ricci_oracle(metric, x, step).as_array()
    fine = fd_ricci_oracle(metric, x, step / 2).as_array()
    return (4 * fine - coarse) / 3


def sectional_profile(metric: CohomOneMetric, xs: Sequence[float]) -> list[CurvatureReport]:
    return [ricci_cohom_one(metric, float(x)) for x in xs]


def max_einstein_residual(metric: CohomOneMetric, xs: Sequence[float]) -> float:
    return max(rep.einstein_residual for rep in sectional_profile(metric, xs))


def convergence_order(steps: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of log(error) against log(step)."""
    slope, _ = np.polyfit(np.log(steps), np.log(errors), 1)
    return float(slope)


def hyperbolic_metric(n: int = 3, r_lo: float = 0.1, r_hi: float = 10.0) -> CohomOneMetric:
    """Hyperbolic space as V^{-1}dr^2 + V dtheta^2 + r^2 g_{S^{n-1}} with V = 1 + r^2."""

    def a(r):
        v = 1 + r * r
        return v**-0.5, -r * v**-1.5, -(v**-1.5) + 3 * r * r * v**-2.5

    def f(r):
        v = 1 + r * r
        return v**0.5, r * v**-0.5, v**-0.5 - r * r * v**-1.5

    return CohomOneMetric(n, FiberSpec(n - 1, 1), r_lo, r_hi, a, f,
                          lambda r: (r, 1.0, 0.0), 2 * math.pi, label="hyperbolic")


def flat_product(n: int = 3, length: float = 10.0) -> CohomOneMetric:
    """dx^2 + dtheta^2 + g_torus; every curvature vanishes."""
    one = constant_jet(1.0)
    return CohomOneMetric(n, FiberSpec(n - 1, 0), 0.0, length, one, one, one, 1.0, label="flat")
