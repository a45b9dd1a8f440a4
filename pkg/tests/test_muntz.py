import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beurling_lab import distributions as dist
from beurling_lab.distributions import Exponential, GammaDist, PointMass, Scaled, SquaredGamma
from beurling_lab.errors import CapabilityError, DataError, DomainError, ResourceError
from beurling_lab.muntz import (
    SampledKernel,
    SurvivalKernel,
    identity_gap,
    muntz_transform,
    sampled_from_law,
    survival_series,
)
from beurling_lab.rng import RngStream

CLOSED = [Exponential(1.0), Exponential(3.0), Scaled(Exponential(1.0), 0.5), PointMass(0.8)]


@pytest.mark.parametrize("d", CLOSED, ids=dist.to_literal)
def test_series_equals_minus_psi(d):
    t = np.geomspace(0.02, 20.0, 40)
    assert np.allclose(survival_series(d, t, 1e-12), -dist.psi_closed(d, t), atol=2e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 5.0), st.floats(0.05, 10.0))
def test_series_exponential_property(lam, t):
    d = Exponential(lam)
    got = survival_series(d, np.array([t]), 1e-12)[0]
    assert got == pytest.approx(-dist.psi_closed(d, np.array([t]))[0], abs=5e-12)


def test_series_range():
    # -Psi lies in [-1, 0]
    t = np.geomspace(0.01, 100, 50)
    for d in (GammaDist(2.0, 1.0), SquaredGamma(3.0, 2.0)):
        v = survival_series(d, t)
        assert np.all(v <= 1e-10) and np.all(v >= -1 - 1e-10)


def test_series_scaling_covariance():
    # P f_c(t) = P f(t / c) for f_c(x) = f(x / c)
    d = GammaDist(2.5, 1.0)
    t = np.array([0.3, 1.1, 4.0])
    assert np.allclose(survival_series(Scaled(d, 2.0), t), survival_series(d, t / 2.0), atol=1e-10)


def test_series_budget_and_domain():
    with pytest.raises(ResourceError):
        survival_series(Exponential(1.0), np.array([1e-6]), 1e-12, budget=1000)
    with pytest.raises(DomainError):
        survival_series(Exponential(1.0), np.array([0.0]))


def test_sampled_kernel_matches_law():
    d = Exponential(1.0)
    k = sampled_from_law(d, 60.0, 600_001)
    for t in (0.25, 1.0, 3.0):
        exact = -dist.psi_closed(d, np.array([t]))[0]
        assert muntz_transform(k, t) == pytest.approx(exact, abs=1e-6)
    assert muntz_transform(SurvivalKernel(d), 1.0) == pytest.approx(-dist.psi_closed(d, np.array([1.0]))[0], abs=1e-10)


def test_sampled_kernel_integral_bracket():
    k = SampledKernel([0.0, 1.0, 2.0], [1.0, 0.5, 0.0])
    val, half = k.integral()
    assert val == pytest.approx(1.0) and half == pytest.approx(0.5)


def test_sampled_kernel_nonvanishing_tail():
    k = SampledKernel([0.0, 1.0], [1.0, 0.5])
    with pytest.raises(CapabilityError):
        muntz_transform(k, 0.5)


@pytest.mark.parametrize(
    "x,f",
    [([0.0], [1.0]), ([0.0, 1.0], [1.0, 2.0]), ([1.0, 0.5], [1.0, 0.0]), ([0.0, 1.0], [1.0, np.nan]), ([0, 1, 2], [1, 0])],
)
def test_sampled_kernel_validation(x, f):
    with pytest.raises(DataError):
        SampledKernel(x, f)


def test_sampled_kernel_csv(tmp_path):
    p = tmp_path / "k.csv"
    p.write_text("x,f\n0,1\n1,0.5\n2,0\n")
    k = SampledKernel.from_csv(p)
    assert k.x.tolist() == [0.0, 1.0, 2.0]
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n0,1\n")
    with pytest.raises(DataError):
        SampledKernel.from_csv(bad)
    bad.write_text("x,f\n0,one\n")
    with pytest.raises(DataError):
        SampledKernel.from_csv(bad)


@pytest.mark.parametrize("d", [Exponential(1.0), GammaDist(3.0, 2.0), SquaredGamma(4.0, 3.0)], ids=dist.to_literal)
def test_identity_gap_within_noise(d):
    rows = identity_gap(d, [0.1, 0.5, 1.0, 3.0], 100_000, RngStream(99))
    for r in rows:
        assert r.gap <= 5 * r.mc_stderr + 1e-10


def test_identity_gap_thread_independent():
    a = identity_gap(Exponential(1.0), [0.5, 1.0], 70_000, RngStream(1), threads=1)
    b = identity_gap(Exponential(1.0), [0.5, 1.0], 70_000, RngStream(1), threads=3)
    assert a == b


def test_identity_gap_min_count():
    with pytest.raises(DomainError):
        identity_gap(Exponential(1.0), [1.0], 999, RngStream(1))


def test_sampled_kernel_refinement_converges():
    d = GammaDist(2.0, 1.0)
    t = 0.37
    exact = muntz_transform(SurvivalKernel(d), t)
    ms = np.array([1, 2, 4, 8, 16, 32])
    errs = [abs(muntz_transform(sampled_from_law(d, 40.0, 40 * m + 1), t) - exact) for m in ms]
    # interpolation and trapezoid errors cancel on average, so single halvings
    # are erratic; the fitted order over five halvings is what is stable
    order = np.polyfit(np.log(1.0 / ms), np.log(errs), 1)[0]  # slope in log h
    assert order >= 1.0
    assert errs[-1] < errs[0] / 32
