import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from einlab import bh_family as bh
from einlab.errors import BelowExtremal, DomainError, NoHorizon
from einlab.geom_core import max_einstein_residual


@settings(max_examples=60)
@given(n=st.integers(3, 7), k=st.sampled_from([-1, 0, 1]), m=st.floats(0.01, 50.0))
def test_horizon_is_largest_root(n, k, m):
    r = bh.horizon_radius(n, k, m)
    v, v1, _ = bh.v_jet(n, k, m, r)
    assert abs(v) < 1e-12 * max(1.0, r * r)
    assert v1 > 0
    # nothing vanishes further out
    grid = np.linspace(r * (1 + 1e-6), 10 * r + 10, 200)
    assert np.all(bh.v_jet(n, k, m, grid)[0] > 0)


@settings(max_examples=40)
@given(n=st.integers(3, 7), k=st.sampled_from([0, 1]), r=st.floats(0.05, 20.0))
def test_mass_horizon_round_trip(n, k, r):
    m = bh.mass_from_horizon(n, k, r)
    assert bh.horizon_radius(n, k, m) == pytest.approx(r, rel=1e-11)


@pytest.mark.parametrize("n", range(3, 8))
def test_extremal_identities(n):
    m_minus, r_plus = bh.extremal_parameters(n)
    v, v1, v2 = bh.v_jet(n, -1, m_minus, r_plus)
    assert abs(v) < 1e-12 and abs(v1) < 1e-12
    assert v2 == pytest.approx(2 * n, rel=1e-12)
    assert bh.horizon_radius(n, -1, m_minus) == r_plus
    assert bh.period_beta(n, -1, r_plus) == math.inf


def test_domain_errors():
    m_minus, _ = bh.extremal_parameters(3)
    with pytest.raises(BelowExtremal):
        bh.horizon_radius(3, -1, m_minus - 0.01)
    with pytest.raises(NoHorizon):
        bh.horizon_radius(3, 1, 0.0)
    with pytest.raises(NoHorizon):
        bh.horizon_radius(4, 0, -1.0)
    with pytest.raises(DomainError):
        bh.horizon_radius(2, 1, 1.0)
    with pytest.raises(DomainError):
        bh.horizon_radius(3, 2, 1.0)
    with pytest.raises(DomainError):
        bh.beta_preimages(3, 1, -1.0)


def test_negative_mass_hyperbolic_fiber_has_a_horizon():
    m_minus, r_ext = bh.extremal_parameters(3)
    r = bh.horizon_radius(3, -1, 0.5 * m_minus)
    assert r > r_ext


def test_fold_point_n3():
    fold = bh.fold_point(3)
    assert fold.beta0 == pytest.approx(2 * math.pi / math.sqrt(3), abs=1e-9)
    assert fold.r_fold == pytest.approx(1 / math.sqrt(3), abs=1e-7)
    assert fold.closed_forms_agree


@pytest.mark.parametrize("n", [4, 5, 6])
def test_fold_matches_exact_maximum_not_quoted_form(n):
    fold = bh.fold_point(n)
    assert fold.beta0 == pytest.approx(fold.beta0_analytic, rel=1e-12)
    assert not fold.closed_forms_agree


def test_two_preimages_below_fold():
    masses = bh.beta_preimages(3, 1, 3.0)
    assert len(masses) == 2
    for m in masses:
        assert bh.beta_of_mass(3, 1, m) == pytest.approx(3.0, abs=1e-9)
    small, large = (bh.horizon_radius(3, 1, m) for m in masses)
    assert small < 1 / math.sqrt(3) < large


def test_no_preimage_above_fold():
    fold = bh.fold_point(3)
    assert bh.beta_preimages(3, 1, fold.beta0 + 0.1) == []


@settings(max_examples=25)
@given(beta=st.floats(0.05, 20.0), k=st.sampled_from([-1, 0]), n=st.integers(3, 6))
def test_unique_preimage_for_flat_and_hyperbolic_fibers(beta, k, n):
    masses = bh.beta_preimages(n, k, beta)
    assert len(masses) == 1
    assert bh.beta_of_mass(n, k, masses[0]) == pytest.approx(beta, rel=1e-9)


@pytest.mark.parametrize("k", [-1, 0])
@pytest.mark.parametrize("n", [3, 4, 5])
def test_beta_monotone_in_mass(n, k):
    betas = [bh.beta_of_mass(n, k, m) for m in bh.mass_grid(n, k, 50)]
    assert np.all(np.diff(betas) < 0)


def test_dbeta_dr_matches_difference_quotient():
    for k in (-1, 0, 1):
        r, h = 1.3, 1e-6
        fd = (bh.period_beta(3, k, r + h) - bh.period_beta(3, k, r - h)) / (2 * h)
        assert bh.dbeta_dr(3, k, r) == pytest.approx(fd, rel=1e-7)


@pytest.mark.parametrize("k", [-1, 0, 1])
@pytest.mark.parametrize("n", [3, 4, 5])
def test_black_holes_are_einstein(n, k):
    for m in bh.mass_grid(n, k, 5):
        metric = bh.build_metric(n, k, float(m), 10.0)
        xs = np.linspace(metric.x_lo, metric.x_hi, 22)[1:-1]
        assert max_einstein_residual(metric, xs) < 1e-8


def test_hyperbolic_member():
    metric = bh.build_metric(3, 1, 0.0, 5.0)
    assert metric.x_lo == 0.0 and metric.theta_length == pytest.approx(2 * math.pi)


def test_params_record():
    p = bh.BlackHoleParams(3, 1, 1.0)
    assert p.beta == pytest.approx(bh.beta_of_mass(3, 1, 1.0))
    assert not p.degenerate
    assert bh.BlackHoleParams(3, 1, -1.0).r_plus is None
