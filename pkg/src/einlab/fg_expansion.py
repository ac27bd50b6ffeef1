"""Geodesic compactification and Fefferman-Graham coefficients.

For g = a^2 dx^2 + f^2 dtheta^2 + h^2 g_N with conformal infinity at
x -> +inf, the geodesic defining function solves d(log rho)/dx = -a, so

    log rho(x) = -int_{x0}^{x} a(x') dx' + log(scale).

The scale is fixed by the boundary normalization lim rho h = 1, i.e. the
compactified fiber block G_N = rho^2 h^2 tends to 1 at rho = 0. The blocks
G_theta = rho^2 f^2 and G_N are then fitted on a geometric rho grid to
sum_k c_k rho^k (plus d rho^n log rho when n is even).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator

from .errors import DegenerateFit, DomainError, IllConditioned, QuadratureError
from .geom_core import CohomOneMetric, ricci_cohom_one


@dataclass(frozen=True)
class FGGrid:
    """Sampling knobs for the boundary fit."""

    rho_min: float = 1e-3
    rho_max: float = 0.1
    nodes: int = 60
    quad_tol: float = 1e-12
    order_extra: int = 4
    cond_max: float = 1e10

    def order(self, n: int) -> int:
        return n + self.order_extra

    def refined(self, factor: float = 2.0) -> "FGGrid":
        """Shrink the fit window toward the boundary and densify the grid."""
        return replace(
            self,
            rho_max=self.rho_max / factor,
            nodes=int(round(self.nodes * factor)),
            quad_tol=self.quad_tol / factor**2,
        )


def _quad(func, lo, hi, tol):
    # the absolute floor only matters for integrands that vanish identically
    val, err = quad(func, lo, hi, epsabs=1e-16, epsrel=tol, limit=400)
    if not math.isfinite(val):
        raise QuadratureError(f"non-finite integral on [{lo}, {hi}]")
    return val


@dataclass(frozen=True)
class GeodesicChart:
    """Tabulated geodesic defining function rho(x) for x >= x0.

    r_nodes increases, rho_grid decreases (rho -> 0 toward the boundary).
    log_scale is the additive constant turning the raw solution
    (rho(x0) = 1) into the normalized one.
    """

    metric: CohomOneMetric
    r0: float
    tol: float
    log_scale: float
    r_nodes: np.ndarray
    log_rho_nodes: np.ndarray
    normalized: bool = True
    normal_log_scale: float = 0.0
    _interp: PchipInterpolator = field(default=None, repr=False, compare=False)

    @property
    def rho_grid(self) -> np.ndarray:
        return np.exp(self.log_rho_nodes)

    def _a(self, x):
        return self.metric.a(x)[0]

    def tail(self, x: float) -> float:
        """int_x^inf (a - h'/h); equals log(rho h) in the normalized gauge."""
        return _quad(self._tail_integrand, x, math.inf, self.tol)

    def _tail_integrand(self, x):
        if self.metric.radial_excess is not None:
            return self.metric.radial_excess(x)
        hv, h1, _ = self.metric.h(x)
        return self._a(x) - h1 / hv

    def log_rho(self, x: float) -> float:
        """log rho at any x >= x0, integrating from the nearest tabulated node."""
        j = int(np.clip(np.searchsorted(self.r_nodes, x), 0, len(self.r_nodes) - 1))
        if j > 0 and abs(self.r_nodes[j - 1] - x) < abs(self.r_nodes[j] - x):
            j -= 1
        xj = float(self.r_nodes[j])
        if x == xj:
            return float(self.log_rho_nodes[j])
        return float(self.log_rho_nodes[j]) - _quad(self._a, xj, x, self.tol)

    def r_of_rho(self, rho) -> np.ndarray:
        """Invert rho(x): monotone interpolation, then Newton on log rho."""
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        lo, hi = np.exp(np.min(self.log_rho_nodes)), np.exp(np.max(self.log_rho_nodes))
        if np.any(rho < lo * (1 - 1e-12)) or np.any(rho > hi * (1 + 1e-12)):
            raise DomainError(f"rho outside the tabulated range [{lo}, {hi}]")
        out = np.empty_like(rho)
        for i, target in enumerate(np.log(rho)):
            x = float(np.exp(self._interp(target)))
            for _ in range(20):
                dx = (self.log_rho(x) - target) / self._a(x)
                x += dx
                if abs(dx) <= 1e-15 * abs(x):
                    break
            out[i] = x
        return out

    def ode_residual(self) -> float:
        """max over nodes of |d(rho)/dx + a rho| / (a rho).

        d log rho/dx comes from a fourth-order centered difference of the
        tabulated-plus-quadrature function log_rho.
        """
        worst = 0.0
        for x in self.r_nodes[1:-1]:
            d = 1e-3 * max(1.0, abs(x))
            lp1, lm1 = self.log_rho(x + d), self.log_rho(x - d)
            lp2, lm2 = self.log_rho(x + 2 * d), self.log_rho(x - 2 * d)
            deriv = (8 * (lp1 - lm1) - (lp2 - lm2)) / (12 * d)
            a = self._a(x)
            worst = max(worst, abs(deriv + a) / a)
        return worst


def geodesic_defining_function(
    metric: CohomOneMetric,
    r0: float,
    grid: FGGrid | None = None,
    normalize: bool = True,
) -> GeodesicChart:
    """Geodesic defining function by adaptive quadrature of the radial warp a.

    The table extends from r0 outward until rho drops below grid.rho_min / 2.
    With normalize=False the raw solution rho(r0) = 1 is kept.
    """
    grid = grid or FGGrid()
    if not r0 > metric.x_lo:
        raise DomainError(f"r0={r0} must lie inside the metric domain")
    tol = grid.quad_tol

    def a(x):
        v = metric.a(x)[0]
        if not (v > 0 and math.isfinite(v)):
            raise QuadratureError(f"radial warp not positive at x={x}: {v}")
        return v

    def tail_integrand(x):
        if metric.radial_excess is not None:
            return metric.radial_excess(x)
        av = a(x)
        hv, h1, _ = metric.h(x)
        return av - h1 / hv

    h0 = metric.h(r0)[0]
    tail = _quad(tail_integrand, r0, math.inf, tol)
    normal_log_scale = math.log(1.0 / h0) + tail
    log_scale = normal_log_scale if normalize else 0.0

    # march outward in steps of about 0.05 in log rho
    xs = [float(r0)]
    logs = [log_scale]
    stop = math.log(grid.rho_min / 2)
    while logs[-1] > stop:
        x = xs[-1]
        step = 0.05 / a(x)
        xs.append(x + step)
        logs.append(logs[-1] - _quad(a, x, x + step, tol))
        if len(xs) > 20000:
            raise QuadratureError("defining function does not reach rho_min")
    xs = np.array(xs)
    logs = np.array(logs)
    if np.any(np.diff(logs) >= 0):
        raise QuadratureError("rho is not strictly decreasing")
    interp = PchipInterpolator(logs[::-1], np.log(xs[::-1]))
    return GeodesicChart(metric, float(r0), tol, log_scale, xs, logs, normalize, normal_log_scale, interp)


@dataclass(frozen=True)
class CompactifiedBlocks:
    """Samples of g_rho = G_theta dtheta^2 + G_N g_N on a rho grid (ascending)."""

    rho: np.ndarray
    g_theta: np.ndarray
    g_fiber: np.ndarray
    x: np.ndarray


def _rho_nodes(grid: FGGrid) -> np.ndarray:
    return np.geomspace(grid.rho_min, grid.rho_max, grid.nodes)


def compactified_blocks(metric: CohomOneMetric, chart: GeodesicChart, grid: FGGrid | None = None) -> CompactifiedBlocks:
    """G_theta = rho^2 f^2 and G_N = rho^2 h^2 on the geometric rho grid.

    G_N is evaluated as exp(2 int_x^inf (a - h'/h)) (shifted by the chart's
    gauge constant when unnormalized); the integrand is small and smooth, so
    the block keeps near full relative precision even where rho h cancels.
    """
    grid = grid or FGGrid()
    rho = _rho_nodes(grid)
    xs = chart.r_of_rho(rho)
    shift = 0.0 if chart.normalized else chart.log_scale - chart.normal_log_scale
    log_gn = 2 * (np.array([chart.tail(x) for x in xs]) + shift)
    f = np.array([metric.f(x)[0] for x in xs])
    h = np.array([metric.h(x)[0] for x in xs])
    g_fiber = np.exp(log_gn)
    g_theta = g_fiber * (f / h) ** 2
    return CompactifiedBlocks(rho, g_theta, g_fiber, xs)


@dataclass(frozen=True)
class FGSeries:
    """Fitted boundary expansion; coefficients[k] = (theta block, fiber block).

    log_coefficient holds the rho^n log rho pair for even n, else None.
    """

    n: int
    order: int
    coefficients: np.ndarray
    log_coefficient: np.ndarray | None
    trace_gn: float
    divergence_free: bool
    condition: float
    fit_residual: float
    rho_range: tuple[float, float]

    def g(self, k: int) -> np.ndarray:
        return self.coefficients[k]

    @property
    def boundary_metric(self) -> np.ndarray:
        return self.coefficients[0]

    @property
    def log_magnitude(self) -> float:
        if self.log_coefficient is None:
            return 0.0
        return float(np.max(np.abs(self.log_coefficient)))

    def odd_below_n(self) -> float:
        """Largest |g_(k)| entry over odd k < n."""
        ks = [k for k in range(1, self.n) if k % 2 == 1]
        if not ks:
            return 0.0
        return float(max(np.max(np.abs(self.coefficients[k])) for k in ks))

    def as_record(self) -> dict:
        return {
            "n": self.n,
            "order": self.order,
            "coefficients_theta": self.coefficients[:, 0].tolist(),
            "coefficients_fiber": self.coefficients[:, 1].tolist(),
            "log_coefficient": None if self.log_coefficient is None else self.log_coefficient.tolist(),
            "trace_gn": self.trace_gn,
            "divergence_free": self.divergence_free,
            "condition": self.condition,
            "fit_residual": self.fit_residual,
            "rho_min": self.rho_range[0],
            "rho_max": self.rho_range[1],
        }


def extract_coefficients(blocks: CompactifiedBlocks, n: int, K: int | None = None, cond_max: float = 1e10) -> FGSeries:
    """Least-squares fit of both blocks in powers of rho (plus rho^n log rho for even n).

    The fit variable is rho / rho_max so the condition number reflects the
    grid geometry, not the units. The divergence of g_(n) vanishes
    identically for these homogeneous boundaries and is not computed.
    """
    if K is None:
        K = n + 4
    rho = np.asarray(blocks.rho)
    if K + 2 > rho.size:
        raise DomainError("fewer samples than fit parameters")
    scale = float(rho.max())
    u = rho / scale
    cols = [u**j for j in range(K + 1)]
    with_log = n % 2 == 0
    if with_log:
        cols.append(u**n * np.log(rho))
    A = np.column_stack(cols)
    cond = float(np.linalg.cond(A))
    if cond > cond_max:
        raise IllConditioned(f"condition number {cond:.3e} exceeds {cond_max:.1e}; refine the grid")
    Y = np.column_stack([blocks.g_theta, blocks.g_fiber])
    sol, *_ = np.linalg.lstsq(A, Y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ sol - Y) ** 2)))
    coeffs = sol[: K + 1] / scale ** np.arange(K + 1)[:, None]
    log_c = sol[K + 1] / scale**n if with_log else None
    c0 = coeffs[0]
    if np.any(c0 <= 0):
        raise IllConditioned(f"boundary metric not positive definite: {c0}")
    trace = float(coeffs[n, 0] / c0[0] + (n - 1) * coeffs[n, 1] / c0[1])
    return FGSeries(n, K, coeffs, log_c, trace, True, cond, resid, (float(rho.min()), scale))


def fg_series(metric: CohomOneMetric, r0: float | None = None, grid: FGGrid | None = None, normalize: bool = True) -> FGSeries:
    """Chart, blocks and fit in one call."""
    grid = grid or FGGrid()
    if r0 is None:
        r0 = metric.x_lo + 0.5 * (min(metric.x_hi, metric.x_lo + 10.0) - metric.x_lo)
    chart = geodesic_defining_function(metric, r0, grid, normalize=normalize)
    blocks = compactified_blocks(metric, chart, grid)
    return extract_coefficients(blocks, metric.n, grid.order(metric.n), grid.cond_max)


@dataclass(frozen=True)
class FalloffFit:
    slope: float
    intercept: float
    rho: np.ndarray
    deviation: np.ndarray


def curvature_falloff_exponent(
    metric: CohomOneMetric,
    chart: GeodesicChart,
    rho_lo: float = 1e-3,
    rho_hi: float = 1e-1,
    samples: int = 25,
    floor: float = 1e-13,
) -> FalloffFit:
    """Slope of log max_planes |K + 1| against log rho.

    Raises DegenerateFit when |K + 1| sits at roundoff level everywhere
    (exact hyperbolic space), since no exponent is defined then.
    """
    rho = np.geomspace(rho_lo, rho_hi, samples)
    xs = chart.r_of_rho(rho)
    far = metric.restricted(metric.x_lo, math.inf)
    dev = np.array([max(abs(s + 1) for s in ricci_cohom_one(far, float(x)).sectional) for x in xs])
    if np.all(dev < floor):
        raise DegenerateFit("exactly hyperbolic: |K + 1| vanishes to roundoff")
    if np.any(dev < floor):
        raise DegenerateFit("|K + 1| reaches roundoff inside the fit window")
    slope, intercept = np.polyfit(np.log(rho), np.log(dev), 1)
    return FalloffFit(float(slope), float(intercept), rho, dev)
