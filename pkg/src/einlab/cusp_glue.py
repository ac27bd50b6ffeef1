"""Cusp degeneration and gluing for the k = -1 black hole family.

The extremal member m = m_-(n) has a double root of V at r_+ = sqrt((n-2)/n).
In the geodesic coordinate ds = V^{-1/2} dr its metric reads

    g_E = ds^2 + V(s) dtheta^2 + r(s)^2 g_N,   theta in [0, beta],

and V(s) ~ n exp(2 sqrt(n) s) as s -> -inf. Closing the cusp with a
hyperbolic tube dt^2 + cosh^2(sqrt(n) t) dtheta^2 times r_+^2 g_N, matched
at t - R = s + R with equal circle lengths, gives an approximate Einstein
metric whose error is confined to a unit collar around the seam.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator

from .bh_family import extremal_parameters
from .errors import ConfigError, DomainError, FitError, QuadratureError
from .geom_core import CohomOneMetric, FiberSpec, constant_jet, ricci_cohom_one

GAUGES = ("reference", "cusp")
SMOOTHING_PROFILES = ("exp-bump",)


# -- the extremal potential, cancellation-free near the double root ---------


class ExtremalPotential:
    """V(r_+ + d) for the extremal mass, evaluated from the offset d.

    Writing x = d / r_+ and p = n - 2,

        V = d^2 + (2/n) q(x),   q(x) = (1+x)^{-p} - 1 + p x,

    so the linear terms cancel analytically and q is summed as a series
    for small x.
    """

    SERIES_CUTOFF = 0.05
    TERMS = 40

    def __init__(self, n: int):
        self.n = n
        self.m, self.r_plus = extremal_parameters(n)
        p = n - 2
        # binom(-p, j) for j = 0..TERMS+2
        c = [1.0]
        for j in range(1, self.TERMS + 3):
            c.append(c[-1] * (-p - j + 1) / j)
        self._binom = np.array(c)

    def _q(self, x):
        p = self.n - 2
        if abs(x) < self.SERIES_CUTOFF:
            j = np.arange(2, self.TERMS + 2)
            return float(np.sum(self._binom[2 : self.TERMS + 2] * x**j))
        return (1 + x) ** (-p) - 1 + p * x

    def _q1(self, x):
        p = self.n - 2
        return -p * math.expm1(-(p + 1) * math.log1p(x))

    def _q2(self, x):
        p = self.n - 2
        return p * (p + 1) * (1 + x) ** (-p - 2)

    def jet(self, d: float) -> tuple[float, float, float]:
        """(V, dV/dr, d2V/dr2) at r = r_+ + d."""
        n, rp = self.n, self.r_plus
        x = d / rp
        v = d * d + (2.0 / n) * self._q(x)
        v1 = 2.0 * d + (2.0 / (n * rp)) * self._q1(x)
        v2 = 2.0 + (2.0 / (n * rp * rp)) * self._q2(x)
        return v, v1, v2

    def value(self, d: float) -> float:
        return self.jet(d)[0]


# -- extremal metric in the geodesic gauge ----------------------------------


@dataclass(frozen=True)
class ExtremalMetric:
    """g_E in s-gauge with the tabulated inverse r(s).

    gauge "reference" fixes s(r_+ + 1) = 0; gauge "cusp" shifts s by the
    constant that makes r - r_+ ~ exp(sqrt(n) s) exactly as s -> -inf.
    """

    n: int
    beta: float
    s_min: float
    s_max: float
    gauge: str
    offset: float
    potential: ExtremalPotential = field(repr=False)
    u_nodes: np.ndarray = field(repr=False)
    s_nodes: np.ndarray = field(repr=False)
    quad_tol: float = 1e-13
    metric: CohomOneMetric = field(default=None, repr=False)
    _guess: PchipInterpolator = field(default=None, repr=False, compare=False)
    _rcache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def r_plus(self) -> float:
        return self.potential.r_plus

    @property
    def m_minus(self) -> float:
        return self.potential.m

    def _phi(self, u):
        d = math.exp(u)
        return d / math.sqrt(self.potential.value(d))

    def s_of_u(self, u: float) -> float:
        """s at r = r_+ + exp(u), integrating from the nearest node."""
        j = int(np.clip(np.searchsorted(self.u_nodes, u), 1, len(self.u_nodes) - 1))
        if abs(self.u_nodes[j - 1] - u) < abs(self.u_nodes[j] - u):
            j -= 1
        uj = float(self.u_nodes[j])
        if u == uj:
            return float(self.s_nodes[j])
        val, _ = quad(self._phi, uj, u, epsabs=0.0, epsrel=self.quad_tol, limit=200)
        return float(self.s_nodes[j]) + val

    def offset_r(self, s: float) -> float:
        """d(s) = r(s) - r_+ by Newton on the tabulated s(u)."""
        hit = self._rcache.get(s)
        if hit is not None:
            return hit
        lo, hi = self.s_nodes[0], self.s_nodes[-1]
        if not lo <= s <= hi:
            raise DomainError(f"s={s} outside the tabulated range [{lo}, {hi}]")
        u = float(self._guess(s))
        for _ in range(30):
            du = (self.s_of_u(u) - s) / self._phi(u)
            u -= du
            if abs(du) < 1e-15 * max(1.0, abs(u)):
                break
        d = math.exp(u)
        if len(self._rcache) < 200000:
            self._rcache[s] = d
        return d

    def r_of_s(self, s: float) -> float:
        return self.r_plus + self.offset_r(s)

    def v_of_s(self, s: float) -> float:
        return self.potential.value(self.offset_r(s))

    def jets(self, s: float):
        """Closed-form jets in s: f = sqrt V, h = r with dh/ds = sqrt V."""
        d = self.offset_r(s)
        v, v1, v2 = self.potential.jet(d)
        sv = math.sqrt(v)
        f = (sv, 0.5 * v1, 0.5 * v2 * sv)
        h = (self.r_plus + d, sv, 0.5 * v1)
        return f, h


def _build_table(pot: ExtremalPotential, u_lo: float, u_hi: float, tol: float):
    n = pot.n

    def phi(u):
        d = math.exp(u)
        v = pot.value(d)
        if not v > 0:
            raise QuadratureError(f"V non-positive at r - r_+ = {d}")
        return d / math.sqrt(v)

    us = np.linspace(u_lo, u_hi, int(math.ceil((u_hi - u_lo) / 0.25)) + 1)
    us = np.unique(np.append(us, 0.0))
    i0 = int(np.searchsorted(us, 0.0))
    s = np.zeros_like(us)
    for i in range(i0 + 1, len(us)):
        s[i] = s[i - 1] + quad(phi, us[i - 1], us[i], epsabs=0.0, epsrel=tol, limit=200)[0]
    for i in range(i0 - 1, -1, -1):
        s[i] = s[i + 1] - quad(phi, us[i], us[i + 1], epsabs=0.0, epsrel=tol, limit=200)[0]
    # lim_{u -> -inf} (u / sqrt(n) - s(u)) = int_{-inf}^0 (phi - 1/sqrt(n)) du;
    # the integrand is O(exp(u)), so the tail below u = -40 is negligible
    c = 1.0 / math.sqrt(n)
    offset = quad(lambda u: phi(u) - c, -40.0, 0.0, epsabs=1e-16, epsrel=tol, limit=400)[0]
    return us, s, offset


def extremal_metric(
    n: int,
    beta: float,
    s_range: tuple[float, float] = (-8.0, 3.0),
    gauge: str = "reference",
    quad_tol: float = 1e-13,
) -> ExtremalMetric:
    """Extremal black hole g_E with theta-length beta, tabulated on s_range."""
    if n < 3:
        raise DomainError(f"n must be >= 3, got {n}")
    if gauge not in GAUGES:
        raise DomainError(f"unknown gauge {gauge!r}")
    if not beta > 0:
        raise DomainError("beta must be positive")
    s_min, s_max = map(float, s_range)
    if not s_min < s_max:
        raise DomainError("empty s range")
    pot = ExtremalPotential(n)
    sq = math.sqrt(n)
    # r - r_+ ~ exp(sqrt(n) (s + shift)) at the cusp end, ~ exp(s) near infinity
    u_lo = min(sq * (s_min - 2.0), -1.0)
    u_hi = max(s_max + 2.0, 1.0)
    us, s_ref, offset = _build_table(pot, u_lo, u_hi, quad_tol)
    shift = offset if gauge == "cusp" else 0.0
    s_nodes = s_ref + shift
    if s_nodes[0] > s_min or s_nodes[-1] < s_max:
        raise QuadratureError("tabulation does not cover the requested s range")
    guess = PchipInterpolator(s_nodes, us)
    em = ExtremalMetric(n, float(beta), s_min, s_max, gauge, offset, pot, us, s_nodes, quad_tol, None, guess)

    def f(s):
        return em.jets(s)[0]

    def h(s):
        return em.jets(s)[1]

    metric = CohomOneMetric(
        n, FiberSpec(n - 1, -1), s_min, s_max, constant_jet(1.0), f, h, float(beta),
        label=f"extremal(n={n},gauge={gauge})", meta={"family": "extremal", "n": n},
    )
    object.__setattr__(em, "metric", metric)
    return em


@dataclass(frozen=True)
class AsymptoticFit:
    rate: float
    amplitude: float
    s: np.ndarray
    ratio: np.ndarray
    model_ratio: np.ndarray

    def __iter__(self):
        return iter((self.rate, self.amplitude))


def v_asymptotic_fit(em: ExtremalMetric, width: float = 2.0, samples: int = 41) -> AsymptoticFit:
    """Fit log V(s) = rate s + log amplitude on [s_min, s_min + width].

    ratio holds amplitude exp(rate s) / V(s) with the fitted constants;
    model_ratio uses the limiting constants n exp(2 sqrt(n) s) / V(s), which
    tends to 1 monotonically in the cusp gauge.
    """
    if em.s_min > -4:
        raise FitError(f"s_min={em.s_min} must be <= -4")
    s = np.linspace(em.s_min, em.s_min + width, samples)
    v = np.array([em.v_of_s(x) for x in s])
    if np.any(v <= 0):
        raise FitError("non-positive V sampled")
    rate, log_amp = np.polyfit(s, np.log(v), 1)
    amp = math.exp(log_amp)
    model = em.n * np.exp(2 * math.sqrt(em.n) * s) / v
    return AsymptoticFit(float(rate), amp, s, amp * np.exp(rate * s) / v, model)


def cusp_limit_metric(n: int, circle_length: float = 1.0, s_range=(-10.0, 10.0)) -> CohomOneMetric:
    """g_inf = ds^2 + exp(2 sqrt(n) s) dtheta^2 + r_+^2 g_N (fiber sec = -1)."""
    _, rp = extremal_parameters(n)
    sq = math.sqrt(n)

    def f(s):
        e = math.exp(sq * s)
        return e, sq * e, n * e

    return CohomOneMetric(n, FiberSpec(n - 1, -1), s_range[0], s_range[1], constant_jet(1.0), f,
                          constant_jet(rp), float(circle_length), label=f"cusp_limit(n={n})")


def toral_cusp_metric(n: int, r_range=(-10.0, 10.0)) -> CohomOneMetric:
    """g_C = dr^2 + exp(2r) (dtheta^2 + g_{T^{n-1}}): the hyperbolic cusp on R x T^n."""

    def e(r):
        v = math.exp(r)
        return v, v, v

    return CohomOneMetric(n, FiberSpec(n - 1, 0), r_range[0], r_range[1], constant_jet(1.0), e, e, 1.0,
                          label=f"toral_cusp(n={n})")


def _cosh_jet(n):
    sq = math.sqrt(n)

    def f(t):
        return math.cosh(sq * t), sq * math.sinh(sq * t), n * math.cosh(sq * t)

    return f


def tube_metric(n: int, alpha: float, tau: float) -> CohomOneMetric:
    """g_D = dt^2 + cosh^2(sqrt(n) t) dtheta^2 + r_+^2 g_N, theta-length alpha, |t| < tau."""
    if not (alpha > 0 and tau > 0):
        raise DomainError("alpha and tau must be positive")
    _, rp = extremal_parameters(n)
    return CohomOneMetric(n, FiberSpec(n - 1, -1), -tau, tau, constant_jet(1.0), _cosh_jet(n),
                          constant_jet(rp), float(alpha), label=f"tube(n={n})")


# -- gluing ------------------------------------------------------------------


def _sigma(u):
    if u <= 0:
        return 0.0, 0.0, 0.0
    e = math.exp(-1.0 / u)
    return e, e / u**2, e * (1.0 / u**4 - 2.0 / u**3)


def cutoff(u: float) -> tuple[float, float, float]:
    """C-infinity step chi(u) = sigma(u) / (sigma(u) + sigma(1-u)) and its two derivatives."""
    if u <= 0:
        return 0.0, 0.0, 0.0
    if u >= 1:
        return 1.0, 0.0, 0.0
    a0, a1, a2 = _sigma(u)
    b0, b1, b2 = _sigma(1 - u)
    b1, b2 = -b1, b2  # chain rule for sigma(1 - u)
    d0, d1, d2 = a0 + b0, a1 + b1, a2 + b2
    num1 = a1 * d0 - a0 * d1
    chi = a0 / d0
    chi1 = num1 / d0**2
    chi2 = (a2 * d0 - a0 * d2) / d0**2 - 2 * d1 * num1 / d0**3
    return chi, chi1, chi2


@dataclass(frozen=True)
class GlueConfig:
    n: int
    beta: float
    R: float
    collar_width: float = 1.0
    smoothing: str = "exp-bump"
    gauge: str = "reference"
    eps_admissible: float = 0.25
    s_max: float = 3.0
    samples: int = 801

    def __post_init__(self):
        if self.n < 3:
            raise ConfigError(f"n must be >= 3, got {self.n}")
        if not self.beta > 0:
            raise ConfigError("beta must be positive")
        if self.smoothing not in SMOOTHING_PROFILES:
            raise ConfigError(f"unknown smoothing profile {self.smoothing!r}")
        if self.gauge not in GAUGES:
            raise ConfigError(f"unknown gauge {self.gauge!r}")
        if not self.collar_width > 0:
            raise ConfigError("collar_width must be positive")
        if self.R < self.collar_width:
            raise ConfigError(f"R={self.R} must be >= collar_width={self.collar_width}")

    @property
    def collar(self) -> tuple[float, float]:
        return self.R - self.collar_width / 2, self.R + self.collar_width / 2


def matching_alpha(em: ExtremalMetric, R: float) -> float:
    """alpha = beta sqrt(V(-R)) / cosh(sqrt(n) R): equal circle lengths at the seam."""
    return em.beta * math.sqrt(em.v_of_s(-R)) / math.cosh(math.sqrt(em.n) * R)


@dataclass(frozen=True)
class GluedMetric:
    config: GlueConfig
    alpha: float
    extremal: ExtremalMetric = field(repr=False)
    tube: CohomOneMetric = field(repr=False)
    metric: CohomOneMetric = field(repr=False)
    x: np.ndarray = field(repr=False)
    residual_profile: np.ndarray = field(repr=False)
    residual_sup: float = 0.0
    residual_outside: float = 0.0

    @property
    def seam_lengths(self) -> tuple[float, float]:
        """(L-, L+) circle lengths of the two truncated pieces at x = R."""
        R = self.config.R
        return self.alpha * self.tube.f(R)[0], self.extremal.beta * self.extremal.metric.f(-R)[0]

    def profile_rows(self):
        for x, res in zip(self.x, self.residual_profile):
            _, f, h = self.metric.values(float(x))
            yield float(x), f, h, float(res)


def _blend(chi, lo, hi):
    c0, c1, c2 = chi
    l0, l1, l2 = lo
    h0, h1, h2 = hi
    diff0, diff1 = h0 - l0, h1 - l1
    return (
        (1 - c0) * l0 + c0 * h0,
        (1 - c0) * l1 + c0 * h1 + c1 * diff0,
        (1 - c0) * l2 + c0 * h2 + 2 * c1 * diff1 + c2 * diff0,
    )


def glue(config: GlueConfig) -> GluedMetric:
    """Tube x fiber for x <= R - w/2, extremal (s = x - 2R) for x >= R + w/2, blended between."""
    n, R, w = config.n, config.R, config.collar_width
    em = extremal_metric(n, config.beta, (-R - w - 1.0, config.s_max), gauge=config.gauge)
    alpha = matching_alpha(em, R)
    if alpha > config.eps_admissible:
        raise ConfigError(f"alpha={alpha:.4g} exceeds the admissible bound {config.eps_admissible}")
    _, rp = extremal_parameters(n)
    tube = tube_metric(n, alpha, R + w)
    c_lo, c_hi = config.collar
    beta = config.beta

    def pieces(x):
        tf = tube.f(x)
        ef, eh = em.jets(x - 2 * R)
        return (alpha * tf[0], alpha * tf[1], alpha * tf[2]), (rp, 0.0, 0.0), \
            (beta * ef[0], beta * ef[1], beta * ef[2]), eh

    def fh(x):
        if x <= c_lo:
            tf = tube.f(x)
            return (alpha * tf[0], alpha * tf[1], alpha * tf[2]), (rp, 0.0, 0.0)
        if x >= c_hi:
            ef, eh = em.jets(x - 2 * R)
            return (beta * ef[0], beta * ef[1], beta * ef[2]), eh
        tf_, th_, ef_, eh_ = pieces(x)
        c0, c1, c2 = cutoff((x - c_lo) / w)
        chi = (c0, c1 / w, c2 / w**2)
        return _blend(chi, tf_, ef_), _blend(chi, th_, eh_)

    x_lo, x_hi = 0.0, 2 * R + config.s_max
    metric = CohomOneMetric(
        n, FiberSpec(n - 1, -1), x_lo, x_hi, constant_jet(1.0),
        lambda x: fh(x)[0], lambda x: fh(x)[1], 1.0,
        label=f"glued(n={n},R={R},beta={beta})",
        meta={"family": "glued", "R": R, "alpha": alpha},
    )
    xs = np.unique(np.concatenate([
        np.linspace(x_lo, x_hi, 401)[1:-1],
        np.linspace(c_lo, c_hi, config.samples),
    ]))
    res = np.array([ricci_cohom_one(metric, float(x)).einstein_residual for x in xs])
    inside = (xs >= c_lo) & (xs <= c_hi)
    return GluedMetric(
        config, alpha, em, tube, metric, xs, res,
        residual_sup=float(res[inside].max()),
        residual_outside=float(res[~inside].max()) if np.any(~inside) else 0.0,
    )


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    abscissa: np.ndarray
    values: np.ndarray

    def as_record(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "abscissa": self.abscissa.tolist(),
            "values": self.values.tolist(),
        }


def _log_fit(x, y):
    y = np.asarray(y, dtype=float)
    if np.any(~(y > 0)):
        raise FitError("non-positive values in a log fit (underflow?)")
    slope, intercept = np.polyfit(x, np.log(y), 1)
    return ExponentFit(float(slope), float(intercept), np.asarray(x, dtype=float), y)


def curvature_deviation(em: ExtremalMetric, s: float) -> float:
    """max over the four plane types of |K_E(s) - K_inf(s)| in matched frames."""
    k_e = ricci_cohom_one(em.metric, s).sectional
    lim = cusp_limit_metric(em.n, 1.0, (em.s_min - 1, em.s_max + 1))
    k_inf = ricci_cohom_one(lim, s).sectional
    return max(abs(p - q) for p, q in zip(k_e, k_inf))


def curvature_convergence_rate(em: ExtremalMetric, width: float = 3.0, samples: int = 31) -> ExponentFit:
    """Slope of log max_planes |K_E - K_inf| over s in [s_min, s_min + width]."""
    if em.s_min > -5:
        raise FitError(f"s_min={em.s_min} must be <= -5")
    # stay strictly inside the chart
    s = np.linspace(em.s_min + 1e-9, em.s_min + width, samples)
    return _log_fit(s, [curvature_deviation(em, float(x)) for x in s])


def residual_decay_fit(n: int, beta: float, R_list, **config_kw) -> ExponentFit:
    """Slope of log sup_collar |Ric + n g| against R."""
    R_list = [float(r) for r in R_list]
    if sorted(R_list) != R_list or len(set(R_list)) != len(R_list):
        raise DomainError("R_list must be strictly increasing")
    sups = [glue(GlueConfig(n, beta, R, **config_kw)).residual_sup for R in R_list]
    return _log_fit(R_list, sups)


def alpha_decay_fit(n: int, beta: float, R_list, gauge: str = "reference") -> ExponentFit:
    """Slope of log alpha(R) from the matching condition."""
    em = extremal_metric(n, beta, (-max(R_list) - 2.0, 3.0), gauge=gauge)
    return _log_fit(list(R_list), [matching_alpha(em, R) for R in R_list])
