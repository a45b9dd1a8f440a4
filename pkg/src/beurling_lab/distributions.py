"""Laws of the random dilation factors and their mean Beurling functions.

Every law is an immutable dataclass. The functions below dispatch on the
type: exact moments, survival P(X >= x), the integrated tail
E[(X - x)^+], reproducible sampling and Psi(t) = E{X/t}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import k_constant
from .errors import CapabilityError, DataError, DomainError, RangeError
from .rng import RngStream, blocked_draws
from .special import gammainc, gammaincc, log_gamma


def _positive(name, x):
    x = float(x)
    if not (x > 0) or not math.isfinite(x):
        raise DomainError(f"{name} must be a positive finite real, got {x!r}")
    return x


@dataclass(frozen=True)
class PointMass:
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", _positive("theta", self.theta))


@dataclass(frozen=True)
class Exponential:
    rate: float

    def __post_init__(self):
        object.__setattr__(self, "rate", _positive("rate", self.rate))


@dataclass(frozen=True)
class GammaDist:
    shape: float
    rate: float

    def __post_init__(self):
        object.__setattr__(self, "shape", _positive("shape", self.shape))
        object.__setattr__(self, "rate", _positive("rate", self.rate))


@dataclass(frozen=True)
class SquaredGamma:
    """Law of Y^2 with Y ~ Gamma(shape, rate)."""

    shape: float
    rate: float

    def __post_init__(self):
        object.__setattr__(self, "shape", _positive("shape", self.shape))
        object.__setattr__(self, "rate", _positive("rate", self.rate))


@dataclass(frozen=True)
class Scaled:
    """Law of factor * X. Nested scalings are flattened on construction."""

    inner: "Distribution"
    factor: float

    def __post_init__(self):
        c = _positive("factor", self.factor)
        inner = self.inner
        while isinstance(inner, Scaled):
            c *= inner.factor
            inner = inner.inner
        if not isinstance(inner, _BASE_TYPES):
            raise DomainError(f"not a distribution: {inner!r}")
        object.__setattr__(self, "inner", inner)
        object.__setattr__(self, "factor", c)


Distribution = Union[PointMass, Exponential, GammaDist, SquaredGamma, Scaled]
_BASE_TYPES = (PointMass, Exponential, GammaDist, SquaredGamma)


def _lgamma(x: float) -> float:
    try:
        v = math.lgamma(x)
    except (OverflowError, ValueError) as exc:
        raise RangeError(f"log-gamma overflow at {x!r}") from exc
    return v


def _exp_checked(v: float, what: str) -> float:
    if v > 709.0:
        raise RangeError(f"{what} overflows a double (log value {v:.4g})")
    return math.exp(v)


# --------------------------------------------------------------------------
# moments


def log_moment(d: Distribution, alpha: float) -> float:
    """log E X^alpha, alpha >= 0."""
    alpha = float(alpha)
    if alpha < 0 or not math.isfinite(alpha):
        raise DomainError(f"alpha must be a finite real >= 0, got {alpha!r}")
    match d:
        case PointMass(theta=th):
            return alpha * math.log(th)
        case Exponential(rate=lam):
            return _lgamma(1.0 + alpha) - alpha * math.log(lam)
        case GammaDist(shape=b, rate=lam):
            return _lgamma(b + alpha) - _lgamma(b) - alpha * math.log(lam)
        case SquaredGamma(shape=b, rate=lam):
            return _lgamma(b + 2 * alpha) - _lgamma(b) - 2 * alpha * math.log(lam)
        case Scaled(inner=inner, factor=c):
            return alpha * math.log(c) + log_moment(inner, alpha)
    raise DomainError(f"not a distribution: {d!r}")


def moment(d: Distribution, alpha: float) -> float:
    """E X^alpha in closed form."""
    return _exp_checked(log_moment(d, alpha), "moment")


def mean(d: Distribution) -> float:
    return moment(d, 1.0)


def mellin_moment(d: Distribution, s):
    """E X^s for complex s with Re s > -1 (vectorized over s)."""
    s = np.asarray(s, dtype=complex)
    match d:
        case PointMass(theta=th):
            return np.exp(s * math.log(th))
        case Exponential(rate=lam):
            return np.exp(log_gamma(1.0 + s) - s * math.log(lam))
        case GammaDist(shape=b, rate=lam):
            return np.exp(log_gamma(b + s) - _lgamma(b) - s * math.log(lam))
        case SquaredGamma(shape=b, rate=lam):
            return np.exp(log_gamma(b + 2.0 * s) - _lgamma(b) - 2.0 * s * math.log(lam))
        case Scaled(inner=inner, factor=c):
            return np.exp(s * math.log(c)) * mellin_moment(inner, s)
    raise DomainError(f"not a distribution: {d!r}")


# --------------------------------------------------------------------------
# survival and tails


def survival(d: Distribution, x):
    """P(X >= x); scalar or array."""
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise DomainError("survival needs x >= 0")
    out = _survival(d, x)
    return float(out) if scalar else out


def _survival(d, x):
    match d:
        case PointMass(theta=th):
            return np.where(x <= th, 1.0, 0.0)
        case Exponential(rate=lam):
            return np.exp(-lam * x)
        case GammaDist(shape=b, rate=lam):
            return gammaincc(b, lam * x)
        case SquaredGamma(shape=b, rate=lam):
            return gammaincc(b, lam * np.sqrt(x))
        case Scaled(inner=inner, factor=c):
            return _survival(inner, x / c)
    raise DomainError(f"not a distribution: {d!r}")


def prob_at_most(d: Distribution, x: float) -> float:
    """P(X <= x), computed directly so that small values keep their accuracy."""
    x = float(x)
    if x < 0:
        return 0.0
    match d:
        case PointMass(theta=th):
            return 1.0 if th <= x else 0.0
        case Exponential(rate=lam):
            return -math.expm1(-lam * x)
        case GammaDist(shape=b, rate=lam):
            return float(gammainc(b, lam * x))
        case SquaredGamma(shape=b, rate=lam):
            return float(gammainc(b, lam * math.sqrt(x)))
        case Scaled(inner=inner, factor=c):
            return prob_at_most(inner, x / c)
    raise DomainError(f"not a distribution: {d!r}")


def tail_mean(d: Distribution, x: float) -> float:
    """E[(X - x)^+] = integral of the survival function over [x, inf)."""
    x = float(x)
    if x < 0:
        raise DomainError("tail_mean needs x >= 0")
    match d:
        case PointMass(theta=th):
            return max(th - x, 0.0)
        case Exponential(rate=lam):
            return math.exp(-lam * x) / lam
        case GammaDist(shape=b, rate=lam):
            v = (b / lam) * gammaincc(b + 1.0, lam * x) - x * gammaincc(b, lam * x)
            return max(float(v), 0.0)
        case SquaredGamma(shape=b, rate=lam):
            y = lam * math.sqrt(x)
            m2 = b * (b + 1.0) / (lam * lam)
            v = m2 * gammaincc(b + 2.0, y) - x * gammaincc(b, y)
            return max(float(v), 0.0)
        case Scaled(inner=inner, factor=c):
            return c * tail_mean(inner, x / c)
    raise DomainError(f"not a distribution: {d!r}")


def tail_cut(d: Distribution, level: float) -> float:
    """Smallest x (up to bisection precision, rounded up) with tail_mean(d, x) <= level."""
    if level <= 0:
        raise DomainError("level must be positive")
    if isinstance(d, PointMass):
        x = max(d.theta - level, 0.0)
        while tail_mean(d, x) > level:
            x = math.nextafter(x, math.inf)
        return x
    if tail_mean(d, 0.0) <= level:
        return 0.0
    hi = max(mean(d), 1e-300)
    while tail_mean(d, hi) > level:
        hi *= 2.0
    lo = hi / 2.0 if hi > mean(d) else 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if tail_mean(d, mid) > level:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * hi:
            break
    return hi


# --------------------------------------------------------------------------
# sampling


def _draw(d, g: np.random.Generator, size: int) -> np.ndarray:
    match d:
        case PointMass(theta=th):
            return np.full(size, th)
        case Exponential(rate=lam):
            return -np.log1p(-g.random(size)) / lam
        case GammaDist(shape=b, rate=lam):
            return g.standard_gamma(b, size) / lam
        case SquaredGamma(shape=b, rate=lam):
            y = g.standard_gamma(b, size) / lam
            return y * y
        case Scaled(inner=inner, factor=c):
            return c * _draw(inner, g, size)
    raise DomainError(f"not a distribution: {d!r}")


def sample(d: Distribution, rng: RngStream, count: int, threads: int = 1) -> np.ndarray:
    """``count`` i.i.d. draws, identical for any thread count."""
    return blocked_draws(rng, count, lambda g, size: _draw(d, g, size), threads)


def sample_root(d: SquaredGamma, rng: RngStream, count: int, threads: int = 1) -> np.ndarray:
    """Draws of Y for X = Y^2; the same generator calls as ``sample``."""
    if not isinstance(d, SquaredGamma):
        raise CapabilityError("sample_root needs a SquaredGamma law")
    return blocked_draws(
        rng, count, lambda g, size: g.standard_gamma(d.shape, size) / d.rate, threads
    )


# --------------------------------------------------------------------------
# mean Beurling function


METHODS = ("closed_form", "muntz_series", "monte_carlo")
MUNTZ_TOL = 1e-12


def has_closed_form(d: Distribution) -> bool:
    if isinstance(d, Scaled):
        return has_closed_form(d.inner)
    if isinstance(d, GammaDist):
        return d.shape == 1.0
    return isinstance(d, (PointMass, Exponential))


def psi_closed(d: Distribution, t):
    """Closed-form Psi on an array of t > 0."""
    t = np.asarray(t, dtype=float)
    match d:
        case PointMass(theta=th):
            x = th / t
            return x - np.floor(x)
        case Exponential(rate=lam):
            return _psi_exp(lam * t)
        case GammaDist(shape=1.0, rate=lam):
            return _psi_exp(lam * t)
        case Scaled(inner=inner, factor=c):
            return psi_closed(inner, t / c)
    raise CapabilityError(f"no closed form for the mean Beurling function of {d!r}")


def _psi_exp(x):
    # 1/x - 1/(e^x - 1); series near 0 avoids cancellation
    x = np.asarray(x, dtype=float)
    small = x < 1e-3
    out = np.empty_like(x)
    xs = x[small]
    out[small] = 0.5 - xs / 12.0 + xs**3 / 720.0
    xl = x[~small]
    with np.errstate(over="ignore"):
        out[~small] = 1.0 / xl - 1.0 / np.expm1(xl)
    return out


def psi_values(d: Distribution, t, tol: float = MUNTZ_TOL, budget: int = 20_000_000):
    """Psi on an array of t, closed form when available, else the Muntz series."""
    t = np.asarray(t, dtype=float)
    if has_closed_form(d):
        return psi_closed(d, t)
    from .muntz import survival_series

    return -survival_series(d, t, tol, budget)


def mean_beurling(
    d: Distribution,
    t: float,
    method: str = "closed_form",
    count: int | None = None,
    rng: RngStream | None = None,
    threads: int = 1,
) -> float:
    """Psi_d(t) = E{X/t}."""
    t = _positive("t", t)
    if method == "closed_form":
        return float(psi_closed(d, np.array([t]))[0])
    if method == "muntz_series":
        if isinstance(d, PointMass):
            return float(psi_closed(d, np.array([t]))[0])
        from .muntz import survival_series

        return float(-survival_series(d, np.array([t]), MUNTZ_TOL)[0])
    if method == "monte_carlo":
        if count is None or rng is None:
            raise DomainError("monte_carlo needs count and rng")
        m, _ = mc_mean_beurling(d, [t], count, rng, threads)
        return float(m[0])
    raise DomainError(f"unknown method {method!r}; expected one of {METHODS}")


def mc_mean_beurling(d: Distribution, t_grid, count: int, rng: RngStream, threads: int = 1):
    """Monte Carlo E{X/t} and its standard error on a grid (shared draws)."""
    x = sample(d, rng, count, threads)
    means, errs = [], []
    for t in t_grid:
        y = x / float(t)
        f = y - np.floor(y)
        means.append(float(np.mean(f)))
        errs.append(float(np.std(f, ddof=1) / math.sqrt(count)) if count > 1 else math.inf)
    return np.array(means), np.array(errs)


def mean_rho_norm_sq(d: Distribution) -> float:
    """E ||rho_X||^2 = K E X."""
    m = mean(d)
    if not math.isfinite(m):
        raise DomainError("the law has an infinite mean")
    return k_constant().value * m


# --------------------------------------------------------------------------
# families and literals

# shapes beyond this lose the Gamma sampler's and the series' accuracy
MAX_SHAPE = 2.0**53


def concentrated_family(n: int, vartheta: float) -> list[SquaredGamma]:
    """X_k = Y_k^2 with Y_k ~ Gamma(n^(3+v)/k, n^(3+v)/sqrt(k)), k = 1..n.

    E Y_k = 1/sqrt(k) and Var Y_k = n^-(3+v): the family concentrates on the
    points 1/k as n grows.
    """
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    vartheta = _positive("vartheta", vartheta)
    p = 3.0 + vartheta
    scale = float(n) ** p
    if not math.isfinite(scale) or scale > MAX_SHAPE:
        safe_n = int(math.floor(MAX_SHAPE ** (1.0 / p)))
        raise RangeError(
            f"n^(3+vartheta) = {scale:.3g} exceeds the supported shape range",
            safe_n=safe_n,
        )
    return [SquaredGamma(scale / k, scale / math.sqrt(k)) for k in range(1, int(n) + 1)]


_TAGS = {"pointmass": 1, "exp": 1, "gamma": 2, "sqgamma": 2}


def parse_distribution(text: str) -> Distribution:
    """Parse ``pointmass:0.5``, ``exp:2``, ``gamma:3:7``, ``sqgamma:3:7``, ``scaled:0.25:exp:1``."""
    tokens = text.strip().split(":")
    d, rest = _parse_tokens(tokens, text)
    if rest:
        raise DataError(f"trailing tokens in distribution literal {text!r}")
    return d


def _parse_tokens(tokens, text):
    if not tokens or not tokens[0]:
        raise DataError(f"empty distribution literal {text!r}")
    tag = tokens[0].lower()

    def num(i):
        try:
            return float(tokens[i])
        except (IndexError, ValueError):
            raise DataError(f"bad or missing number in distribution literal {text!r}") from None

    try:
        if tag == "scaled":
            c = num(1)
            inner, rest = _parse_tokens(tokens[2:], text)
            return Scaled(inner, c), rest
        if tag not in _TAGS:
            raise DataError(f"unknown distribution tag {tag!r} in {text!r}")
        args = [num(i + 1) for i in range(_TAGS[tag])]
        cls = {"pointmass": PointMass, "exp": Exponential, "gamma": GammaDist, "sqgamma": SquaredGamma}[tag]
        return cls(*args), tokens[1 + _TAGS[tag]:]
    except DomainError as exc:
        raise DataError(f"invalid parameters in {text!r}: {exc}") from None


def to_literal(d: Distribution) -> str:
    match d:
        case PointMass(theta=th):
            return f"pointmass:{th!r}"
        case Exponential(rate=lam):
            return f"exp:{lam!r}"
        case GammaDist(shape=b, rate=lam):
            return f"gamma:{b!r}:{lam!r}"
        case SquaredGamma(shape=b, rate=lam):
            return f"sqgamma:{b!r}:{lam!r}"
        case Scaled(inner=inner, factor=c):
            return f"scaled:{c!r}:{to_literal(inner)}"
    raise DomainError(f"not a distribution: {d!r}")
