"""Distances for random families and the hypothesis checks around them.

gNB distance: target approximated by sum c_k Psi_k with Psi_k(t) = E{Z_k/t}.
pNB distance: the expected squared error E||target - sum c_k rho_{Z_k}||^2;
for an independent family its Gram matrix is the gNB one with the diagonal
replaced by E||rho_Z||^2 = K E Z.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from . import distributions as dist
from .arith import mobius_sieve
from .basis import CHI, BasisSpec, ChiTarget, SurvivalTarget
from .core import DEFAULT_TOL, EULER_GAMMA, k_constant
from .errors import CapabilityError, ContractError, DataError, DomainError, ResourceError
from .gram import (
    DistanceReport,
    GramSystem,
    assemble_deterministic,
    coefficient_slack,
    residual_with_coeffs,
    solve,
)
from .parallel import pmap
from .rng import RngStream

BURNOL_C = 2.0 + EULER_GAMMA - math.log(4.0 * math.pi)
DEFAULT_EPS_GRID = (0.3, 0.2, 0.1, 0.05)


# --------------------------------------------------------------------------
# presets


def preset_family(name: str, n: int, scale: float | None = None, vartheta: float = 1.0) -> list:
    """Named families Z_1..Z_n.

    bd: point masses 1/k; exp-dilated: Exponential(k * scale); gamma-kn:
    Gamma(k, scale) with scale defaulting to n; concentrated: the
    SquaredGamma family concentrating on 1/k with parameter vartheta.
    """
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    if name == "bd":
        return [dist.PointMass(1.0 / k) for k in range(1, n + 1)]
    if name == "exp-dilated":
        c = 1.0 if scale is None else float(scale)
        return [dist.Exponential(k * c) for k in range(1, n + 1)]
    if name == "gamma-kn":
        rate = float(n) if scale is None else float(scale)
        return [dist.GammaDist(float(k), rate) for k in range(1, n + 1)]
    if name == "concentrated":
        return dist.concentrated_family(n, vartheta)
    raise DomainError(f"unknown preset {name!r}; expected bd, exp-dilated, gamma-kn or concentrated")


PRESETS = ("bd", "exp-dilated", "gamma-kn", "concentrated")


# --------------------------------------------------------------------------
# deterministic (Baez-Duarte) systems


@functools.lru_cache(maxsize=16)
def bd_system(n: int, tol: float = DEFAULT_TOL, threads: int = 1) -> GramSystem:
    """Gram system of rho_{1/k}, k = 1..n, target chi."""
    return assemble_deterministic([1.0 / k for k in range(1, n + 1)], tol, threads)


@dataclass(frozen=True)
class ScanRow:
    n: int
    d_n_sq: float
    slack: float
    dn_sq_times_log_n: float
    c_over_log_n: float


def bd_scan(n_max: int, tol: float = DEFAULT_TOL, threads: int = 1) -> list[ScanRow]:
    """Optimal squared distances d_n^2 for n = 1..n_max, with the Burnol
    reference value C / log n alongside (NaN at n = 1)."""
    sys = bd_system(int(n_max), tol, threads)
    rows = []
    for n in range(1, n_max + 1):
        rep = solve(sys.leading(n))
        logn = math.log(n)
        rows.append(
            ScanRow(
                n,
                rep.distance_sq,
                rep.certified_slack,
                rep.distance_sq * logn if n > 1 else math.nan,
                BURNOL_C / logn if n > 1 else math.nan,
            )
        )
    return rows


def mobius_coeffs(n: int, epsilon: float) -> np.ndarray:
    """c_k = -mu(k) k^-eps, so that chi - sum c_k rho_{1/k} = chi + sum mu(k) k^-eps rho_{1/k}."""
    mu = mobius_sieve(n)
    return np.array([-mu[k - 1] * k ** (-float(epsilon)) for k in range(1, n + 1)])


@dataclass(frozen=True)
class NuResult:
    n: int
    epsilon: float
    value: float
    slack: float


def nu_report(n: int, epsilon: float, tol: float = DEFAULT_TOL, threads: int = 1) -> NuResult:
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    sys = bd_system(int(n), tol, threads)
    c = mobius_coeffs(n, epsilon)
    return NuResult(int(n), float(epsilon), residual_with_coeffs(sys, c), coefficient_slack(sys, c))


def nu_eval(n: int, epsilon: float, tol: float = DEFAULT_TOL, threads: int = 1) -> float:
    """||chi + sum_{k<=n} mu(k) k^-eps rho_{1/k}||^2."""
    return nu_report(n, epsilon, tol, threads).value


# --------------------------------------------------------------------------
# quadrature Gram systems for continuous laws

_GL_ORDER = 8
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_ORDER)
# most survival evaluations allowed for one node of the Muntz series
_TERMS_PER_NODE = 20_000
_MAX_LEVEL = 5


def _panel_nodes(edges: np.ndarray):
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    w = (half[:, None] * _GL_W[None, :]).ravel()
    return x, w


def _nodes(t0: float, per_decade: int, v_panels: int):
    """Nodes/weights for int_{t0}^1 dt (log panels) and int_1^inf dt via t = 1/v."""
    decades = math.log10(1.0 / t0)
    n_t = max(1, int(math.ceil(decades * per_decade)))
    t_edges = np.logspace(math.log10(t0), 0.0, n_t + 1)
    t_edges[-1] = 1.0
    tt, wt = _panel_nodes(t_edges)
    v, wv = _panel_nodes(np.linspace(0.0, 1.0, v_panels + 1))
    return tt, wt, 1.0 / v, wv / (v * v)


def _t0_for(elements) -> float:
    t0 = 1e-8
    for d in elements:
        if not dist.has_closed_form(d):
            x_cut = dist.tail_cut(d, 1e-12 * 1e-3)
            t0 = max(t0, min(1e-2, x_cut / _TERMS_PER_NODE))
    return t0


def _target_values(target, t):
    if isinstance(target, ChiTarget):
        return np.where(t <= 1.0, 1.0, 0.0)
    law = target.law
    if isinstance(law, dist.PointMass):
        raise CapabilityError("survival targets of point masses are not supported; use chi")
    return np.asarray(dist.survival(law, t), dtype=float)


def _quadrature_level(elements, target, t0, per_decade, v_panels, threads):
    tt, wt, tv, wv = _nodes(t0, per_decade, v_panels)
    nodes = np.concatenate((tt, tv))
    weights = np.concatenate((wt, wv))
    phi = np.column_stack(pmap(lambda d: dist.psi_values(d, nodes), elements, threads))
    tgt = _target_values(target, nodes)
    wphi = phi * weights[:, None]
    g = wphi.T @ phi
    b = wphi.T @ tgt
    # [0, t0]: every Psi tends to 1/2 and the target to 1; trapezoid rule
    psi0 = np.asarray([dist.psi_values(d, np.array([t0]))[0] for d in elements])
    tg0 = float(_target_values(target, np.array([t0]))[0])
    g0 = 0.5 * t0 * (0.25 + np.outer(psi0, psi0))
    b0 = 0.5 * t0 * (0.5 + psi0 * tg0)
    g += g0
    b += b0
    small_err_g = 0.5 * t0 * np.abs(np.outer(psi0, psi0) - 0.25)
    small_err_b = 0.5 * t0 * np.abs(psi0 * tg0 - 0.5)
    if isinstance(target, ChiTarget):
        norm = 1.0
    else:
        norm = float(weights @ (tgt * tgt)) + 0.5 * t0 * (1.0 + tg0 * tg0)
    return g, b, norm, small_err_g, small_err_b


@functools.lru_cache(maxsize=32)
def _continuous_system(elements: tuple, target, tol: float, threads: int) -> GramSystem:
    t0 = _t0_for(elements)
    per_decade, v_panels = 16, 8
    prev = _quadrature_level(elements, target, t0, per_decade, v_panels, threads)
    for level in range(_MAX_LEVEL):
        per_decade *= 2
        v_panels *= 2
        cur = _quadrature_level(elements, target, t0, per_decade, v_panels, threads)
        dg = np.abs(cur[0] - prev[0]) + cur[3]
        db = np.abs(cur[1] - prev[1]) + cur[4]
        dn = abs(cur[2] - prev[2])
        achieved = float(max(dg.max(), db.max(), dn))
        if achieved <= tol:
            break
        prev = cur
    else:
        raise ResourceError(
            f"panel quadrature did not reach tol={tol:g}",
            achievable_tol=achieved,
        )
    g, b, norm = cur[0], cur[1], cur[2]
    g = 0.5 * (g + g.T)
    return GramSystem(
        g=g,
        b=b,
        target_norm_sq=norm,
        entry_err=0.5 * (dg + dg.T),
        rhs_err=db,
        target_err=dn,
        labels=tuple(dist.to_literal(e) for e in elements),
    )


def gnb_system(basis: BasisSpec, tol: float = DEFAULT_TOL, threads: int = 1) -> GramSystem:
    """Gram system of the mean Beurling functions Psi_k.

    Point masses use the exact piecewise integrator (target chi only); laws
    with a density use composite Gauss-Legendre panels on [t0, 1] (log-spaced)
    and on t = 1/v in (0, 1], refined until two levels agree within tol.
    Mixing the two kinds in one basis is not supported.
    """
    elems = basis.elements
    point = [isinstance(e, dist.PointMass) for e in elems]
    if all(point):
        if not isinstance(basis.target, ChiTarget):
            raise CapabilityError("point-mass bases support the chi target only")
        return assemble_deterministic([e.theta for e in elems], tol, threads)
    if any(point):
        raise CapabilityError(
            "bases mixing point masses with continuous laws are not supported"
        )
    return _continuous_system(tuple(elems), basis.target, float(tol), int(threads))


def pnb_system(basis: BasisSpec, tol: float = DEFAULT_TOL, threads: int = 1) -> GramSystem:
    if not basis.independence:
        raise ContractError("pnb Gram cross terms need an independent family")
    base = gnb_system(basis, tol, threads)
    k = k_constant()
    means = np.array([dist.mean(e) for e in basis.elements])
    g = np.array(base.g)
    err = np.array(base.entry_err)
    idx = np.arange(basis.n)
    g[idx, idx] = k.value * means
    err[idx, idx] = k.err * means
    return GramSystem(g, base.b, base.target_norm_sq, err, base.rhs_err, base.target_err, base.labels)


def _report(sys: GramSystem, coeffs) -> DistanceReport:
    if coeffs is None:
        return solve(sys)
    c = np.asarray(coeffs, dtype=float)
    if c.shape != (sys.n,):
        raise DataError(f"expected {sys.n} coefficients, got shape {c.shape}")
    dsq = residual_with_coeffs(sys, c)
    w = np.linalg.eigvalsh(sys.g)
    cond = float(w[-1] / w[0]) if w[0] > 0 else math.inf
    return DistanceReport(c, dsq, 0.0, 0, cond, coefficient_slack(sys, c))


def gnb_distance(basis: BasisSpec, coeffs=None, tol: float = DEFAULT_TOL, threads: int = 1) -> DistanceReport:
    """D_n^2: optimal (coeffs=None) or for the supplied coefficients."""
    return _report(gnb_system(basis, tol, threads), coeffs)


def pnb_distance(basis: BasisSpec, coeffs=None, tol: float = DEFAULT_TOL, threads: int = 1) -> DistanceReport:
    """pNB distance, assuming an independent family."""
    if not basis.independence:
        raise ContractError("pnb_distance needs independence=True")
    return _report(pnb_system(basis, tol, threads), coeffs)


# --------------------------------------------------------------------------
# hypotheses


def assumption_p(basis: BasisSpec) -> float:
    """P(0 < Z_k <= 1 for all k) for an independent family."""
    if not basis.independence:
        raise ContractError("the product formula needs an independent family")
    return math.prod(dist.prob_at_most(e, 1.0) for e in basis.elements)


@dataclass(frozen=True)
class SuffiResult:
    value: float
    mean_abs_log_min: float
    stderr: float
    count: int


def suffi_estimate(basis: BasisSpec, mc_count: int, rng: RngStream, threads: int = 1) -> SuffiResult:
    """1 / (log 2 + E|log min_k Z_k|); exact for point masses, Monte Carlo
    otherwise (element k draws from stream rng.stream_id + k)."""
    elems = basis.elements
    if all(isinstance(e, dist.PointMass) for e in elems):
        m = abs(math.log(min(e.theta for e in elems)))
        return SuffiResult(1.0 / (math.log(2.0) + m), m, 0.0, 0)
    if mc_count < 10_000:
        raise DomainError(f"mc_count must be >= 10^4 for random families, got {mc_count}")
    low = None
    for k, e in enumerate(elems, start=1):
        x = dist.sample(e, rng.child(rng.stream_id + k), mc_count, threads)
        low = x if low is None else np.minimum(low, x)
    a = np.abs(np.log(low))
    m = float(np.mean(a))
    se = float(np.std(a, ddof=1) / math.sqrt(mc_count))
    return SuffiResult(1.0 / (math.log(2.0) + m), m, se, mc_count)


def suffi_bound(basis: BasisSpec, mc_count: int, rng: RngStream, threads: int = 1) -> float:
    return suffi_estimate(basis, mc_count, rng, threads).value


@dataclass(frozen=True)
class ConditionC:
    value: float
    per_n: tuple
    trend: str  # "bounded" or "unbounded-trend"


def condition_c(coeffs_by_n, beta: float) -> float:
    """max_n sum_k c_{k,n}^2 / k^beta."""
    return condition_c_report(coeffs_by_n, beta).value


def condition_c_report(coeffs_by_n, beta: float, growth: float = 1.5) -> ConditionC:
    """Also flags an unbounded trend: the last value exceeds ``growth`` times
    the value halfway through the sequence."""
    if not beta > 1:
        raise DomainError(f"beta must exceed 1, got {beta}")
    vals = []
    for c in coeffs_by_n:
        c = np.asarray(c, dtype=float)
        k = np.arange(1, c.size + 1, dtype=float)
        vals.append(float(np.sum(c * c / k**beta)))
    if not vals:
        return ConditionC(0.0, (), "bounded")
    half = vals[len(vals) // 2]
    trend = "unbounded-trend" if len(vals) >= 4 and vals[-1] > growth * max(half, 1e-300) else "bounded"
    return ConditionC(max(vals), tuple(vals), trend)


@dataclass(frozen=True)
class MomentRow:
    alpha: float
    sup: float
    argmax_k: int
    last: float
    violation: bool


def moment_growth(family, alphas, k_max: int | None = None, growth: float = 1.5) -> list[MomentRow]:
    """sup_{k <= k_max} k^alpha E Z_k^alpha per alpha, from exact moments.

    ``violation`` flags growth with k: the value at k_max exceeds ``growth``
    times the value at k = 1 (a bounded family keeps the two comparable).
    """
    family = list(family)
    k_max = len(family) if k_max is None else min(int(k_max), len(family))
    if k_max < 1:
        raise DomainError("empty family")
    rows = []
    for a in alphas:
        a = float(a)
        if a < 1:
            raise DomainError(f"alphas must be >= 1, got {a}")
        vals = [math.exp(a * math.log(k) + dist.log_moment(family[k - 1], a)) for k in range(1, k_max + 1)]
        j = int(np.argmax(vals))
        rows.append(MomentRow(a, vals[j], j + 1, vals[-1], vals[-1] > growth * vals[0]))
    return rows


@dataclass(frozen=True)
class T2Row:
    m: float
    value: float
    bound: float  # certified upper bound on value


def _survival_sq_tail(law, m: float, points: int = 4001) -> tuple[float, float]:
    """int_m^inf S^2 with a certified bracket (S nonincreasing)."""
    if isinstance(law, dist.Exponential):
        v = math.exp(-2.0 * law.rate * m) / (2.0 * law.rate)
        return v, v
    if isinstance(law, dist.PointMass):
        v = max(law.theta - m, 0.0)
        return v, v
    x_end = max(dist.tail_cut(law, 1e-300 + 1e-16 * dist.mean(law)), m)
    if x_end <= m:
        tail = float(dist.survival(law, m)) * dist.tail_mean(law, m)
        return 0.5 * tail, tail
    x = np.linspace(m, x_end, points)
    s2 = np.asarray(dist.survival(law, x), dtype=float) ** 2
    dx = np.diff(x)
    upper = float(np.sum(dx * s2[:-1]))
    lower = float(np.sum(dx * s2[1:]))
    # beyond x_end: S^2 <= S(x_end) S
    rest = float(dist.survival(law, x_end)) * dist.tail_mean(law, x_end)
    return 0.5 * (upper + lower) + 0.5 * rest, upper + rest


def t2_check(target, m_grid) -> list[T2Row]:
    """M * int_M^inf target^2 on an increasing grid of M."""
    m_grid = [float(m) for m in m_grid]
    if any(m <= 0 for m in m_grid) or any(b <= a for a, b in zip(m_grid, m_grid[1:])):
        raise DomainError("m_grid must be positive and strictly increasing")
    rows = []
    for m in m_grid:
        if isinstance(target, ChiTarget):
            v = m * max(1.0 - m, 0.0)
            rows.append(T2Row(m, v, v))
        elif isinstance(target, SurvivalTarget):
            v, hi = _survival_sq_tail(target.law, m)
            rows.append(T2Row(m, m * v, m * hi))
        else:
            raise DomainError(f"unknown target {target!r}")
    return rows


def gamma_tail_check(n: int, beta: float, m_grid) -> list[tuple[float, float]]:
    """n^beta * M * exp(-(n/2)(M - 2)) on a grid of M (weight exp(n x / 2))."""
    out = []
    for m in m_grid:
        m = float(m)
        log_v = beta * math.log(n) + math.log(m) - 0.5 * n * (m - 2.0)
        out.append((m, math.exp(log_v) if log_v < 709 else math.inf))
    return out


# --------------------------------------------------------------------------
# Plancherel cross-check


@dataclass(frozen=True)
class CrossRow:
    n: int
    time_domain: float
    mellin: float
    tail_bound: float
    gram_slack: float

    @property
    def gap(self) -> float:
        return abs(self.time_domain - self.mellin)


def plancherel_crosscheck(ns, grid, tol: float = DEFAULT_TOL, threads: int = 1) -> list[CrossRow]:
    """Optimal deterministic residuals (theta_k = 1/k) in time and on the critical line."""
    from .zeta import plancherel_residual

    rows = []
    n_max = max(ns)
    sys = bd_system(int(n_max), tol, threads)
    for n in ns:
        sub = sys.leading(n)
        rep = solve(sub)
        td = residual_with_coeffs(sub, rep.coeffs)
        basis = BasisSpec(tuple(preset_family("bd", n)), "deterministic", True, CHI)
        pr = plancherel_residual(basis, rep.coeffs, grid)
        rows.append(CrossRow(int(n), td, pr.value, pr.tail_bound, rep.certified_slack))
    return rows
