"""Fractional-part dilations and their inner products in L^2(0, inf).

All integrals go through the substitution u = 1/t:

    <rho_a, rho_b> = int_0^inf {a u}{b u} u^-2 du

On every interval between consecutive breakpoints {m/a} and {n/b} the
integrand is (a u - m)(b u - n)/u^2, whose antiderivative is
a b u - (a n + b m) log u - m n / u. The pieces are summed exactly up to a
cutoff U and the tail is bracketed using 0 <= {au}{bu} <= 1.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ResourceError

EULER_GAMMA = 0.577215664901532860606512090082
EPS = np.finfo(float).eps

DEFAULT_TOL = 1e-6
DEFAULT_BUDGET = 50_000_000
# tolerance used to compute K once per process; keeps the pieces under budget
K_TOL = 2e-7

_CHUNK = 1 << 20
# share of tol reserved for the tail bracket, the rest absorbs rounding
_TAIL_SHARE = 0.99
# rounding bound per unit of cutoff, per unit of a*b (four terms of size ~ab)
_ROUNDING_PER_UNIT = 40 * float(EPS)


@dataclass(frozen=True)
class BracketedValue:
    """A number with a certified bound ``err`` on its distance to the truth.

    ``refined`` is an uncertified point estimate (when available) that uses
    the mean value 1/4 of {au}{bu} on the tail instead of its bracket.
    """

    value: float
    err: float
    refined: float | None = None

    def __post_init__(self):
        if not math.isfinite(self.value) or not (self.err >= 0):
            raise DomainError(f"invalid bracket {self.value!r} +- {self.err!r}")

    @property
    def lo(self) -> float:
        return self.value - self.err

    @property
    def hi(self) -> float:
        return self.value + self.err

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def scale(self, c: float) -> "BracketedValue":
        refined = None if self.refined is None else c * self.refined
        return BracketedValue(c * self.value, abs(c) * self.err, refined)


@dataclass(frozen=True)
class Constants:
    euler_gamma: float
    k_const: BracketedValue


def _check_positive(name: str, x: float) -> float:
    x = float(x)
    if not (x > 0) or not math.isfinite(x):
        raise DomainError(f"{name} must be a positive finite real, got {x!r}")
    return x


def rho_eval(theta: float, t: float) -> float:
    """Return {theta/t}."""
    theta = _check_positive("theta", theta)
    t = _check_positive("t", t)
    x = theta / t
    return x - math.floor(x)


def _cutoff_for(tol: float, rate: float, budget: int, scale: float = 0.0) -> float:
    """Smallest cutoff U with tail half-width 1/(2U) plus rounding within tol.

    ``scale`` models the rounding bound as ``scale * U`` (it grows with the
    number of pieces); zero means rounding is negligible at this tol.
    """
    if scale == 0.0 or tol * tol <= 0.0:
        u = 1.0 / (2.0 * _TAIL_SHARE * tol)
    else:
        disc = tol * tol - 2.0 * scale
        if disc <= 0.0:
            raise ResourceError(
                f"tol={tol:g} is below the double-precision floor of this integral",
                achievable_tol=1.01 * math.sqrt(2.0 * scale),
                budget=budget,
            )
        u = (tol - math.sqrt(disc)) / (2.0 * scale)
        u = max(u, 1.0 / (2.0 * _TAIL_SHARE * tol))
    if rate * u > budget:
        u_max = budget / rate
        raise ResourceError(
            f"tol={tol:g} needs about {rate * u:.3g} breakpoints (budget {budget})",
            achievable_tol=1.0 / (2.0 * _TAIL_SHARE * u_max) + scale * u_max,
            budget=budget,
        )
    return u


def _piece_sums(a: float, b: float, lo: float, hi: float) -> tuple[float, float, int]:
    """Exact integral of {au}{bu}/u^2 over [lo, hi], with lo >= 1/max(a,b).

    Returns (fsum of pieces, sum of absolute term sizes, piece count).
    """
    ms = np.arange(math.floor(a * lo) + 1, math.floor(a * hi) + 1, dtype=float) / a
    if a == b:
        pts = ms
    else:
        ns = np.arange(math.floor(b * lo) + 1, math.floor(b * hi) + 1, dtype=float) / b
        pts = np.concatenate((ms, ns))
        pts.sort(kind="stable")
    x = np.empty(pts.size + 2)
    x[0] = lo
    x[1:-1] = pts
    x[-1] = hi
    x0, x1 = x[:-1], x[1:]
    d = x1 - x0
    mid = 0.5 * (x0 + x1)
    m = np.floor(a * mid)
    n = np.floor(b * mid)
    t1 = (a * b) * d
    t2 = (a * n + b * m) * np.log1p(d / x0)
    t3 = (m * n) * (d / (x0 * x1))
    pieces = t1 - t2 + t3
    scale = float(np.sum(np.abs(t1) + np.abs(t2) + np.abs(t3)))
    return math.fsum(pieces), scale, d.size


def _fractional_product_integral(
    a: float, b: float, upper: float
) -> tuple[float, float]:
    """int_0^upper {au}{bu} u^-2 du for a <= b, with a rounding bound."""
    first = 1.0 / b
    if upper <= first:
        return a * b * upper, EPS * a * b * upper
    partial = [a]  # [0, 1/b]: integrand is the constant ab
    scale = a
    count = 0
    rate = a + b if a != b else a
    width = _CHUNK / rate
    lo = first
    while lo < upper:
        hi = min(upper, lo + width)
        s, sc, c = _piece_sums(a, b, lo, hi)
        partial.append(s)
        scale += sc
        count += c
        lo = hi
    total = math.fsum(partial)
    # per-piece rounding, plus breakpoints displaced by one ulp where the
    # integrand jumps by at most 1/u^2
    rounding = 8 * EPS * scale + EPS * rate * (2 + math.log(upper * b)) + EPS * count * EPS
    return total, rounding


def inner_rho_rho(
    a: float, b: float, tol: float = DEFAULT_TOL, budget: int = DEFAULT_BUDGET
) -> BracketedValue:
    """<rho_a, rho_b> in L^2(0, inf) with a certified error at most ``tol``."""
    a = _check_positive("a", a)
    b = _check_positive("b", b)
    tol = _check_positive("tol", tol)
    a, b = (a, b) if a <= b else (b, a)
    rate = a + b if a != b else a
    upper = _cutoff_for(tol, rate, budget, _ROUNDING_PER_UNIT * a * b)
    partial, rounding = _fractional_product_integral(a, b, upper)
    half = 0.5 / upper
    return BracketedValue(
        partial + half, float(half + rounding), refined=partial + 0.5 * half
    )


def inner_chi_rho(
    theta: float, tol: float = DEFAULT_TOL, budget: int = DEFAULT_BUDGET
) -> BracketedValue:
    """<chi, rho_theta> with chi the indicator of (0, 1]."""
    theta = _check_positive("theta", theta)
    tol = _check_positive("tol", tol)
    if theta <= 1.0:
        v = theta * (1.0 - EULER_GAMMA) - theta * math.log(theta)
        return BracketedValue(v, float(4 * EPS * (abs(v) + theta * abs(math.log(theta)))))
    # theta * int_theta^inf {v} v^-2 dv, pieces [m, m+1] are exact
    inner_tol = tol / theta
    upper = _cutoff_for(inner_tol, 1.0, budget)
    total, scale = _frac_over_square(theta, upper)
    half = 0.5 / upper
    err = theta * (half + 8 * EPS * scale)
    return BracketedValue(theta * (total + half), float(err))


def _frac_over_square(lo: float, upper: float) -> tuple[float, float]:
    """int_lo^upper {v} v^-2 dv by exact unit pieces; lo >= 1."""
    parts = []
    scale = 0.0
    m0 = math.floor(lo)
    first_hi = min(float(m0 + 1), upper)
    # [lo, m0+1]: integrand (v - m0)/v^2
    parts.append(math.log(first_hi / lo) - m0 * (1.0 / lo - 1.0 / first_hi))
    start = m0 + 1
    stop = math.floor(upper)
    while start < stop:
        end = min(stop, start + _CHUNK)
        m = np.arange(start, end, dtype=float)
        t2 = np.log1p(1.0 / m)
        t3 = 1.0 / (m + 1.0)
        parts.append(math.fsum(t2 - t3))
        scale += float(np.sum(t2 + t3))
        start = end
    if stop > m0 + 1 and upper > stop:
        parts.append(math.log(upper / stop) - stop * (1.0 / stop - 1.0 / upper))
    return math.fsum(parts), scale + 1.0


_K_LOCK = threading.Lock()
_K_CACHE: list[BracketedValue] = []


def k_constant() -> BracketedValue:
    """K = ||rho_1||^2, computed once per process by the piecewise integrator."""
    if _K_CACHE:
        return _K_CACHE[0]
    with _K_LOCK:
        if not _K_CACHE:
            _K_CACHE.append(inner_rho_rho(1.0, 1.0, K_TOL))
    return _K_CACHE[0]


def constants() -> Constants:
    return Constants(EULER_GAMMA, k_constant())


def norm_rho_sq(theta: float) -> BracketedValue:
    """||rho_theta||^2 = K theta (substitute t -> theta t)."""
    theta = _check_positive("theta", theta)
    return k_constant().scale(theta)
