import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beurling_lab.core import EULER_GAMMA, k_constant
from beurling_lab.errors import DataError, DomainError
from beurling_lab.gram import (
    GramSystem,
    assemble_deterministic,
    determinant_distance,
    residual_with_coeffs,
    solve,
)


def _euclid_system(vectors, target):
    """Gram system of plain vectors, so the projection is known exactly."""
    v = np.asarray(vectors, dtype=float)
    g = v @ v.T
    g = 0.5 * (g + g.T)
    n = len(v)
    return GramSystem(g, v @ target, float(target @ target), np.zeros((n, n)), np.zeros(n))


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=1, max_value=5), st.integers(min_value=0, max_value=2**31))
def test_solve_matches_least_squares(n, seed):
    rng = np.random.default_rng(seed)
    vecs = rng.normal(size=(n, 8))
    target = rng.normal(size=8)
    sys = _euclid_system(vecs, target)
    rep = solve(sys)
    coef, *_ = np.linalg.lstsq(vecs.T, target, rcond=None)
    best = float(np.sum((vecs.T @ coef - target) ** 2))
    assert rep.distance_sq == pytest.approx(best, rel=1e-7, abs=1e-9)
    assert residual_with_coeffs(sys, rep.coeffs) == pytest.approx(best, rel=1e-7, abs=1e-9)
    assert determinant_distance(sys) == pytest.approx(best, rel=1e-6, abs=1e-9)


def test_dropped_modes_and_clamp():
    v = np.array([[1.0, 0.0], [1.0, 0.0]])  # rank one
    sys = _euclid_system(v, np.array([1.0, 0.0]))
    rep = solve(sys)
    assert rep.dropped_modes == 1
    assert rep.distance_sq == pytest.approx(0.0, abs=1e-15)
    assert rep.distance_sq >= 0.0


def test_clamped_flag():
    g = np.array([[1.0]])
    sys = GramSystem(g, np.array([1.0 + 1e-9]), 1.0, np.zeros((1, 1)), np.zeros(1))
    rep = solve(sys)
    assert rep.clamped and rep.distance_sq == 0.0


def test_validation():
    with pytest.raises(DataError):
        GramSystem(np.eye(2), np.ones(3), 1.0, np.zeros((2, 2)), np.zeros(2))
    with pytest.raises(DataError):
        GramSystem(np.array([[1.0, 0.1], [0.2, 1.0]]), np.ones(2), 1.0, np.zeros((2, 2)), np.zeros(2))
    with pytest.raises(DataError):
        GramSystem(np.array([[0.0]]), np.ones(1), 1.0, np.zeros((1, 1)), np.zeros(1))
    with pytest.raises(DataError):
        GramSystem(np.array([[np.nan]]), np.ones(1), 1.0, np.zeros((1, 1)), np.zeros(1))
    sys = GramSystem(np.eye(2), np.ones(2), 3.0, np.zeros((2, 2)), np.zeros(2))
    with pytest.raises(DataError):
        residual_with_coeffs(sys, [1.0])
    with pytest.raises(DomainError):
        solve(sys, cutoff=2.0)
    with pytest.raises(ValueError):
        sys.g[0, 0] = 5.0


def test_d1_closed_form():
    # d_1^2 = 1 - (1 - gamma)^2 / K
    sys = assemble_deterministic([1.0])
    rep = solve(sys)
    k = math.log(2 * math.pi) - EULER_GAMMA
    assert rep.distance_sq == pytest.approx(1 - (1 - EULER_GAMMA) ** 2 / k, abs=rep.certified_slack + 1e-12)
    assert rep.distance_sq == pytest.approx(0.858213, abs=1e-6)


def test_assemble_rejects():
    with pytest.raises(DomainError):
        assemble_deterministic([])
    with pytest.raises(DomainError):
        assemble_deterministic([1.0, -0.5])


def test_nested_distances_nonincreasing():
    sys = assemble_deterministic([1.0 / k for k in range(1, 9)], 1e-5)
    d = [solve(sys.leading(k)) for k in range(1, 9)]
    for a, b in zip(d, d[1:]):
        assert b.distance_sq <= a.distance_sq + a.certified_slack + b.certified_slack


def test_threads_do_not_change_entries():
    th = [1.0, 0.5, 1 / 3]
    a = assemble_deterministic(th, 1e-5, threads=1)
    b = assemble_deterministic(th, 1e-5, threads=3)
    assert np.array_equal(a.g, b.g) and np.array_equal(a.b, b.b)


def test_diagonal_is_k_theta():
    sys = assemble_deterministic([1.0, 0.5], 1e-6)
    k = k_constant()
    assert abs(sys.g[0, 0] - k.value) <= sys.entry_err[0, 0] + k.err
    assert abs(sys.g[1, 1] - 0.5 * k.value) <= sys.entry_err[1, 1] + k.err


def test_report_dict_roundtrip():
    rep = solve(assemble_deterministic([1.0]))
    d = rep.to_dict()
    assert set(d) >= {"coeffs", "distance_sq", "reg_cutoff", "dropped_modes", "condition_estimate", "certified_slack"}
    assert d["coeffs"][0] == pytest.approx((1 - EULER_GAMMA) / k_constant().value, rel=1e-6)


def test_optimality_under_perturbation():
    sys = assemble_deterministic([1.0 / k for k in range(1, 7)], 1e-6)
    rep = solve(sys)
    rng = np.random.default_rng(5)
    for _ in range(100):
        c = rep.coeffs + rng.normal(scale=10.0 ** rng.uniform(-4, 0), size=6)
        assert residual_with_coeffs(sys, c) >= rep.distance_sq - rep.certified_slack


def test_psd_repair():
    g = np.array([[1.0, 1.0 + 1e-13], [1.0 + 1e-13, 1.0]])  # slightly indefinite
    sys = GramSystem(g, np.array([0.5, 0.5]), 1.0, np.zeros((2, 2)), np.zeros(2))
    rep = solve(sys)
    assert rep.dropped_modes == 1
    assert rep.distance_sq == pytest.approx(0.75, abs=1e-9)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_determinant_quotient(n):
    sys = assemble_deterministic([1.0 / k for k in range(1, n + 1)], 1e-6)
    rep = solve(sys)
    assert determinant_distance(sys) == pytest.approx(rep.distance_sq, rel=1e-8)
