import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beurling_lab import distributions as dist
from beurling_lab.basis import BasisSpec, SurvivalTarget
from beurling_lab.distributions import Exponential, PointMass
from beurling_lab.errors import CapabilityError, DataError, DomainError, PoleError, PrecisionWarning
from beurling_lab.rng import RngStream
from beurling_lab.zeta import (
    CriticalLineGrid,
    critical_line_grid,
    first_zero,
    grid_nodes,
    hardy_z,
    load_or_build_grid,
    plancherel_residual,
    vn_profile,
    zeta_em,
    zeta_eta,
    zeta_eval,
    zeta_report,
)
from oracles import adaptive_pieces, brute_psi_pair


def _mp(s):
    return complex(mpmath.zeta(mpmath.mpc(s.real, s.imag)))


@pytest.fixture(scope="module")
def small_grid():
    return critical_line_grid(400.0, 0.05)


@pytest.mark.parametrize(
    "s", [0.5, 2.0, 1.5, 0.1, 0.5 + 14.134725141711534j, 0.5 + 1j, 0.3 - 7j, 1.9 + 40j, 1 + 3j, 1.0 + 1e-6]
)
def test_zeta_against_mpmath(s):
    s = complex(s)
    got = zeta_eval(s)
    ref = _mp(s)
    assert abs(got - ref) <= 1e-11 * max(1.0, abs(ref))


def test_zeta_two_exact():
    assert zeta_eval(2.0) == pytest.approx(math.pi**2 / 6, rel=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(-50.0, 50.0))
def test_routes_agree(sigma, t):
    s = complex(sigma, t)
    rep = zeta_report(s)
    assert rep.route_diff < 1e-10
    assert rep.validated


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(1.0, 50.0))
def test_functional_equation(sigma, t):
    # zeta(s) = 2^s pi^(s-1) sin(pi s / 2) Gamma(1-s) zeta(1-s)
    s = complex(sigma, t)
    lhs = zeta_eval(s)
    fac = complex(2**s * mpmath.pi ** (s - 1) * mpmath.sin(mpmath.pi * s / 2) * mpmath.gamma(1 - s))
    rhs = fac * zeta_eval(complex(1 - sigma, -t))
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs))


def test_conjugate_symmetry():
    s = complex(0.5, 23.7)
    assert zeta_eval(s.conjugate()) == pytest.approx(zeta_eval(s).conjugate(), abs=1e-13)


def test_first_zero():
    z = first_zero()
    assert abs(z - 14.134725141711534) < 1e-9
    assert abs(hardy_z(z)) < 1e-8


@pytest.mark.parametrize("s,exc", [(1.0, PoleError), (0.0, DomainError), (2.5, DomainError), (complex(0.5, math.inf), DomainError)])
def test_domain(s, exc):
    with pytest.raises(exc):
        zeta_eval(s)


def test_precision_warning_beyond_validated():
    with pytest.warns(PrecisionWarning):
        v = zeta_eval(complex(0.5, 60.0))
    assert abs(v - _mp(complex(0.5, 60.0))) < 1e-10
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        zeta_eval(complex(0.5, 49.0))


def test_em_route_far_up_the_line():
    s = np.array([0.5 + 1000j, 0.5 + 4999.5j])
    got = zeta_em(s)
    for g, si in zip(got, s):
        ref = _mp(si)
        assert abs(g - ref) < 1e-9 * max(1.0, abs(ref))


def test_eta_route_standalone():
    assert abs(zeta_eta(0.5 + 10j) - _mp(0.5 + 10j)) < 1e-12


def test_grid_nodes():
    t = grid_nodes(100.0, 0.5)
    assert t[0] == 0.0 and t[-1] == 100.0
    assert np.all(np.diff(t) > 0)
    assert np.diff(t)[0] == pytest.approx(0.05)
    assert np.diff(t)[-1] == pytest.approx(0.5)


def test_grid_csv_roundtrip(tmp_path, small_grid):
    p = tmp_path / "g.csv"
    small_grid.save_csv(p)
    back = CriticalLineGrid.load_csv(p)
    assert back.t_max == small_grid.t_max and back.step == small_grid.step
    assert np.array_equal(back.t, small_grid.t)
    assert np.array_equal(back.values, small_grid.values)
    again = load_or_build_grid(400.0, 0.05, cache=p)
    assert np.array_equal(again.values, small_grid.values)


def test_grid_csv_errors(tmp_path):
    p = tmp_path / "g.csv"
    p.write_text("t,re,im\n0,1,0\n1,1,0\n")
    with pytest.raises(DataError):
        CriticalLineGrid.load_csv(p)
    p.write_text("# t_max=1\n# step=1\nx,y,z\n")
    with pytest.raises(DataError):
        CriticalLineGrid.load_csv(p)


def test_grid_two_sided(small_grid):
    t, v = small_grid.two_sided()
    assert t.size == 2 * small_grid.t.size - 1
    assert np.allclose(t, -t[::-1])
    assert np.allclose(v, np.conj(v[::-1]))
    assert small_grid.route_diff < 1e-12


def test_plancherel_zero_coefficients(small_grid):
    # ||chi||^2 restricted to |t| <= T is (2/pi) arctan(2T)
    basis = BasisSpec((Exponential(1.0),))
    r = plancherel_residual(basis, [0.0], small_grid)
    assert r.value == pytest.approx(2 / math.pi * math.atan(2 * 400.0), abs=1e-6)
    assert 1.0 - r.value <= r.tail_bound


def test_plancherel_matches_time_domain(small_grid):
    d = Exponential(1.0)
    psi = lambda t: dist.psi_closed(d, t)
    norm = brute_psi_pair(psi, psi)
    cross = adaptive_pieces(psi, np.linspace(1e-12, 1.0, 50), rel=1e-12)  # <chi, Psi>
    c = 0.6
    exact = 1.0 - 2 * c * cross + c * c * norm
    r = plancherel_residual(BasisSpec((d,)), [c], small_grid)
    assert abs(r.value - exact) <= r.tail_bound
    assert abs(r.value - exact) < 2e-3


def test_plancherel_survival_target(small_grid):
    # target equal to the survival function of Exp(1), no basis weight: ||S||^2 = 1/2
    b = BasisSpec((Exponential(2.0),), target=SurvivalTarget(Exponential(1.0)))
    r = plancherel_residual(b, [0.0], small_grid)
    assert r.value == pytest.approx(0.5, abs=r.tail_bound)


def test_plancherel_rejects(small_grid):
    b = BasisSpec((Exponential(1.0),), mode="pnb")
    with pytest.raises(CapabilityError):
        plancherel_residual(b, [1.0], small_grid)
    with pytest.raises(DataError):
        plancherel_residual(b.with_mode("gnb"), [1.0, 2.0], small_grid)


def test_vn_zero_for_exact_points():
    fam = [PointMass(1.0 / k) for k in range(1, 5)]
    rows = vn_profile(4, 0.1, fam, [1.0, 10.0], 1000, RngStream(3))
    for r in rows:
        assert r.ev < 1e-25 and r.bound < 1e-20


def test_vn_below_bound():
    fam = dist.concentrated_family(4, 1.0)
    rows = vn_profile(4, 0.1, fam, [0.0, 5.0, 14.13, 30.0], 20_000, RngStream(8))
    for r in rows:
        assert r.ev <= r.bound + 5 * r.stderr
        assert r.ev >= 0


def test_vn_thread_independent():
    fam = [Exponential(k) for k in range(1, 4)]
    a = vn_profile(3, 0.2, fam, [1.0], 70_000, RngStream(1), threads=1)
    b = vn_profile(3, 0.2, fam, [1.0], 70_000, RngStream(1), threads=2)
    assert a == b


def test_vn_validation():
    with pytest.raises(DomainError):
        vn_profile(2, 0.1, [Exponential(1.0)], [1.0], 1000, RngStream(1))
    with pytest.raises(DomainError):
        vn_profile(1, 0.1, [Exponential(1.0)], [1.0], 10, RngStream(1))
