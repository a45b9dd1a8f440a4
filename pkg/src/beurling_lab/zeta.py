"""The zeta function in the critical strip and Plancherel-side distances.

Two independent routes evaluate zeta:

* the alternating eta series with Chebyshev-weighted coefficients
  (zeta = eta / (1 - 2^(1-s))), used by ``zeta_eval``;
* Euler-Maclaurin summation with Bernoulli corrections, used to cross-check
  and, vectorized, to fill the critical-line grid.

On the line s = 1/2 + it the Mellin transform turns every L^2(0, inf) norm
of the form ||target - sum c_k Psi_k|| into an integral over t.
"""

from __future__ import annotations

import csv
import functools
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import distributions as dist
from .basis import BasisSpec, ChiTarget, SurvivalTarget
from .arith import mobius_sieve
from .errors import CapabilityError, DataError, DomainError, PoleError, PrecisionWarning
from .parallel import pmap
from .rng import RngStream
from .special import log_gamma

ETA_TERMS = 64
VALIDATED_T = 50.0
ROUTE_TOL = 1e-8
EM_ORDER = 24
_LOG_ACCEL = math.log(3.0 + math.sqrt(8.0))


# --------------------------------------------------------------------------
# eta series


@functools.lru_cache(maxsize=32)
def _eta_weights(n: int) -> np.ndarray:
    """e_k = (d_n - d_k) / d_n, k = 0..n-1, for the accelerated eta series."""
    # d_k = n sum_{i<=k} (n+i-1)! 4^i / ((n-i)! (2i)!); work with log terms
    logt = np.empty(n + 1)
    logt[0] = 0.0
    for i in range(n):
        logt[i + 1] = logt[i] + math.log(4.0 * (n + i) * (n - i) / ((2 * i + 1) * (2 * i + 2)))
    w = np.exp(logt - logt.max())
    total = math.fsum(w)
    suffix = np.cumsum(w[::-1])[::-1]  # suffix[i] = sum_{j>=i} w_j
    return suffix[1:] / total


def eta_terms_needed(t: float, base: int = ETA_TERMS) -> int:
    """Terms for ~1e-15 accuracy: the error decays like e^(pi|t|/2) (3+sqrt 8)^-n."""
    need = (0.5 * math.pi * abs(t) + math.log1p(2.0 * abs(t)) + 37.0) / _LOG_ACCEL
    return max(base, int(math.ceil(need)))


def zeta_eta(s, terms: int = ETA_TERMS):
    """zeta(s) from the accelerated alternating series (scalar or array s)."""
    scalar = np.ndim(s) == 0
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    e = _eta_weights(int(terms))
    k = np.arange(1, terms + 1, dtype=float)
    signs = np.where(np.arange(terms) % 2 == 0, 1.0, -1.0)
    coef = signs * e
    logk = np.log(k)
    out = np.empty(s.shape, dtype=complex)
    for i, si in enumerate(s):
        eta = np.sum(coef * np.exp(-si * logk))
        out[i] = eta / (1.0 - 2.0 ** (1.0 - si))
    return out[0] if scalar else out


# --------------------------------------------------------------------------
# Euler-Maclaurin


@functools.lru_cache(maxsize=1)
def _bernoulli_even(count: int = 40) -> tuple:
    """B_2, B_4, ..., B_2count as floats divided by (2j)!."""
    m = 2 * count
    a = [Fraction(0)] * (m + 1)
    b = []
    for i in range(m + 1):  # Akiyama-Tanigawa
        a[i] = Fraction(1, i + 1)
        for j in range(i, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
        b.append(a[0])
    return tuple(float(b[2 * j] / math.factorial(2 * j)) for j in range(1, count + 1))


def em_terms_needed(s: complex, order: int = EM_ORDER) -> int:
    # correction ratio ~ (|s + 2j| / (2 pi N))^2 <= 1/4
    return max(30, int(math.ceil((abs(s) + 2 * order) / math.pi)))


def zeta_em(s, n_terms: int | None = None, order: int = EM_ORDER):
    """zeta(s) by Euler-Maclaurin, vectorized; one N for the whole batch."""
    scalar = np.ndim(s) == 0
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    if n_terms is None:
        n_terms = em_terms_needed(complex(s[np.argmax(np.abs(s))]), order)
    big_n = float(n_terms)
    k = np.arange(1, n_terms, dtype=float)
    logk = np.log(k)
    partial = np.exp(-np.outer(s, logk)).sum(axis=1)
    n_pow = np.exp(-s * math.log(big_n))  # N^-s
    out = partial + big_n * n_pow / (s - 1.0) + 0.5 * n_pow
    bern = _bernoulli_even(order)
    poch = s.copy()
    npw = n_pow / big_n  # N^(-s-1)
    for j in range(1, order + 1):
        out = out + bern[j - 1] * poch * npw
        poch = poch * (s + 2 * j - 1) * (s + 2 * j)
        npw = npw / (big_n * big_n)
    return out[0] if scalar else out


# --------------------------------------------------------------------------
# public evaluator


@dataclass(frozen=True)
class ZetaReport:
    value: complex
    alternate: complex
    route_diff: float
    validated: bool


def _check_strip(s: complex) -> complex:
    s = complex(s)
    if s == 1:
        raise PoleError("zeta has a pole at s = 1")
    if not (0.0 < s.real <= 2.0) or not math.isfinite(s.imag):
        raise DomainError(f"zeta_eval supports 0 < Re s <= 2, got {s}")
    return s


def zeta_report(s, terms: int = ETA_TERMS) -> ZetaReport:
    """Both evaluation routes at s and their disagreement."""
    s = _check_strip(s)
    n = eta_terms_needed(s.imag, terms)
    near_factor_zero = abs(1.0 - 2.0 ** (1.0 - s)) < 1e-3
    em = complex(zeta_em(s))
    eta = em if near_factor_zero else complex(zeta_eta(s, n))
    diff = abs(eta - em) / max(1.0, abs(em))
    return ZetaReport(eta, em, diff, abs(s.imag) <= VALIDATED_T)


def zeta_eval(s, terms: int = ETA_TERMS) -> complex:
    """zeta(s) for 0 < Re s <= 2, s != 1.

    Emits a PrecisionWarning when the two routes disagree beyond 1e-8 or when
    |Im s| exceeds the validated range.
    """
    rep = zeta_report(s, terms)
    if not rep.validated:
        warnings.warn(
            f"|Im s| = {abs(complex(s).imag):g} exceeds the validated range {VALIDATED_T:g}",
            PrecisionWarning,
            stacklevel=2,
        )
    elif rep.route_diff > ROUTE_TOL:
        warnings.warn(
            f"zeta routes disagree by {rep.route_diff:.3g} at s = {s}",
            PrecisionWarning,
            stacklevel=2,
        )
    return rep.value


def hardy_theta(t):
    t = np.asarray(t, dtype=float)
    return np.imag(log_gamma(0.25 + 0.5j * t)) - 0.5 * t * math.log(math.pi)


def hardy_z(t: float) -> float:
    """Real-valued rotation e^(i theta(t)) zeta(1/2 + it)."""
    t = float(t)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PrecisionWarning)
        z = zeta_eval(complex(0.5, t))
    return float((np.exp(1j * hardy_theta(t)) * z).real)


def bracket_zero(lo: float, hi: float, scan_step: float = 0.01, xtol: float = 1e-10) -> float:
    """First sign change of hardy_z in [lo, hi], refined by bisection."""
    a = float(lo)
    fa = hardy_z(a)
    while a < hi:
        b = min(a + scan_step, hi)
        fb = hardy_z(b)
        if fa == 0.0:
            return a
        if fa * fb <= 0.0:
            while b - a > xtol:
                m = 0.5 * (a + b)
                fm = hardy_z(m)
                if fa * fm <= 0.0:
                    b = m
                else:
                    a, fa = m, fm
            return 0.5 * (a + b)
        a, fa = b, fb
    raise DomainError(f"no sign change of the rotated zeta in [{lo}, {hi}]")


def first_zero() -> float:
    return bracket_zero(14.0, 14.5)


# --------------------------------------------------------------------------
# critical-line grid


@dataclass(frozen=True)
class CriticalLineGrid:
    """zeta(1/2 + it) on a one-sided grid 0 <= t <= t_max.

    The grid is finer near t = 0; values at -t are the conjugates.
    """

    t_max: float
    step: float
    t: np.ndarray
    values: np.ndarray
    route_diff: float = 0.0

    def __post_init__(self):
        if not (self.step > 0 and self.t_max > 0):
            raise DomainError("grid step and t_max must be positive")
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        if t.shape != v.shape or t.ndim != 1 or t.size < 2:
            raise DataError("grid nodes and values must be equal-length vectors")
        if t[0] != 0.0 or np.any(np.diff(t) <= 0):
            raise DataError("grid must start at 0 and increase strictly")
        if not np.all(np.isfinite(v)):
            raise DataError("non-finite zeta values on the grid")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", v)

    @property
    def s(self) -> np.ndarray:
        return 0.5 + 1j * self.t

    def weights(self) -> np.ndarray:
        """Trapezoid weights of the one-sided grid."""
        d = np.diff(self.t)
        w = np.zeros_like(self.t)
        w[:-1] += 0.5 * d
        w[1:] += 0.5 * d
        return w

    def two_sided(self):
        """Nodes and values on [-t_max, t_max] using conjugate symmetry."""
        t = np.concatenate((-self.t[:0:-1], self.t))
        v = np.concatenate((np.conj(self.values[:0:-1]), self.values))
        return t, v

    def save_csv(self, path) -> None:
        with open(Path(path), "w", newline="") as fh:
            fh.write(f"# t_max={self.t_max!r}\n# step={self.step!r}\n")
            w = csv.writer(fh)
            w.writerow(["t", "re", "im"])
            for ti, vi in zip(self.t, self.values):
                w.writerow([repr(float(ti)), repr(float(vi.real)), repr(float(vi.imag))])

    @classmethod
    def load_csv(cls, path) -> "CriticalLineGrid":
        meta = {}
        rows = []
        with open(Path(path), newline="") as fh:
            for line in fh:
                if line.startswith("#"):
                    key, _, val = line[1:].strip().partition("=")
                    meta[key.strip()] = val.strip()
                else:
                    rows.append(line)
        reader = csv.reader(rows)
        header = next(reader, None)
        if header != ["t", "re", "im"]:
            raise DataError(f"{path}: expected header 't,re,im'")
        try:
            data = np.array([[float(x) for x in r] for r in reader if r])
            t_max = float(meta["t_max"])
            step = float(meta["step"])
        except (KeyError, ValueError) as exc:
            raise DataError(f"{path}: malformed grid cache ({exc})") from None
        return cls(t_max, step, data[:, 0], data[:, 1] + 1j * data[:, 2])


def grid_nodes(t_max: float, step: float, fine_until: float = 20.0, refine: int = 10) -> np.ndarray:
    """Step/refine on [0, fine_until], then step up to t_max (last node exactly t_max)."""
    if not (t_max > 0 and step > 0):
        raise DomainError("t_max and step must be positive")
    fine_end = min(fine_until, t_max)
    n_fine = max(1, int(math.ceil(fine_end / (step / refine))))
    fine = np.linspace(0.0, fine_end, n_fine + 1)
    if t_max <= fine_end:
        return fine
    n_coarse = max(1, int(math.ceil((t_max - fine_end) / step)))
    coarse = np.linspace(fine_end, t_max, n_coarse + 1)[1:]
    return np.concatenate((fine, coarse))


def critical_line_grid(
    t_max: float = 5000.0, step: float = 0.05, threads: int = 1, chunk: int = 256
) -> CriticalLineGrid:
    """Evaluate zeta on the grid by Euler-Maclaurin; nodes with |t| <= 50 are
    cross-checked against the eta series."""
    t = grid_nodes(t_max, step)
    s = 0.5 + 1j * t
    pieces = [s[i : i + chunk] for i in range(0, s.size, chunk)]
    values = np.concatenate(pmap(lambda p: zeta_em(p), pieces, threads))
    low = np.nonzero(t <= VALIDATED_T)[0][:: max(1, int(0.5 / (step / 10)))]
    alt = zeta_eta(s[low], ETA_TERMS)
    diff = float(np.max(np.abs(alt - values[low]) / np.maximum(1.0, np.abs(values[low]))))
    if diff > ROUTE_TOL:
        warnings.warn(f"zeta routes disagree by {diff:.3g} on the grid", PrecisionWarning)
    return CriticalLineGrid(float(t_max), float(step), t, values, diff)


def load_or_build_grid(t_max, step, cache=None, threads=1) -> CriticalLineGrid:
    if cache is not None and Path(cache).exists():
        g = CriticalLineGrid.load_csv(cache)
        if g.t_max == float(t_max) and g.step == float(step):
            return g
    g = critical_line_grid(t_max, step, threads)
    if cache is not None:
        g.save_csv(cache)
    return g


# --------------------------------------------------------------------------
# Plancherel


@dataclass(frozen=True)
class PlancherelResult:
    value: float
    tail_bound: float
    c_zeta: float
    eta: float
    t_max: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _target_mellin(target, s):
    """Mellin transform of the target on the line, and a bound for |s * it|."""
    if isinstance(target, ChiTarget):
        return 1.0 / s, 1.0
    if isinstance(target, SurvivalTarget):
        return dist.mellin_moment(target.law, s) / s, dist.moment(target.law, 0.5)
    raise CapabilityError(f"no Mellin image for target {target!r}")


def plancherel_residual(
    basis: BasisSpec, coeffs, grid: CriticalLineGrid, eta: float = 0.25, fit_from: float = 1.0
) -> PlancherelResult:
    """(1/2pi) int |T^(s) + (zeta(s)/s) sum c_k E Z_k^s|^2 dt over [-T, T].

    The tail beyond T is not added; ``tail_bound`` bounds it using
    |zeta(1/2+it)| <= C t^eta with C fitted on the grid (an envelope, not a
    theorem).
    """
    if basis.mode == "pnb":
        raise CapabilityError("pnb distances are not the norm of one function; no Mellin image")
    c = np.asarray(coeffs, dtype=float)
    if c.shape != (basis.n,):
        raise DataError(f"expected {basis.n} coefficients, got shape {c.shape}")
    s = grid.s
    tgt, a0 = _target_mellin(basis.target, s)
    mix = np.zeros_like(s)
    for ck, d in zip(c, basis.elements):
        if ck != 0.0:
            mix = mix + ck * dist.mellin_moment(d, s)
    f = np.abs(tgt + grid.values / s * mix) ** 2
    value = 2.0 * float(np.sum(grid.weights() * f)) / (2.0 * math.pi)
    sel = grid.t >= fit_from
    c_zeta = float(np.max(np.abs(grid.values[sel]) / grid.t[sel] ** eta)) if np.any(sel) else math.inf
    amp = float(sum(abs(ck) * dist.moment(d, 0.5) for ck, d in zip(c, basis.elements)))
    big_t = grid.t_max
    tail = (2.0 / math.pi) * (
        a0 * a0 / big_t + (c_zeta * amp) ** 2 * big_t ** (2 * eta - 1) / (1 - 2 * eta)
    )
    return PlancherelResult(value, tail, c_zeta, eta, big_t)


# --------------------------------------------------------------------------
# V_n profile


@dataclass(frozen=True)
class VnRow:
    t: float
    ev: float
    stderr: float
    bound: float


def vn_profile(
    n: int,
    epsilon: float,
    family,
    t_grid,
    mc_count: int,
    rng: RngStream,
    threads: int = 1,
) -> list[VnRow]:
    """Monte Carlo E V_n(t) with
    V_n(t) = |sum_k mu(k) k^-eps (k^-s - X_k^s) zeta(s)/s|^2, s = 1/2 + it.

    X_k are independent; law k uses stream ``rng.stream_id + k``. ``bound`` is
    4 n sum_k E(k^-1/2 - sqrt X_k)^2 |zeta(s)|^2, computed from exact moments.
    """
    family = list(family)
    if len(family) != n:
        raise DomainError(f"family has {len(family)} laws, expected n = {n}")
    if mc_count < 1000:
        raise DomainError(f"mc_count must be >= 1000, got {mc_count}")
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    mu = mobius_sieve(n)
    w = np.array([mu[k - 1] * k ** (-float(epsilon)) for k in range(1, n + 1)])
    logs = [
        np.log(dist.sample(d, rng.child(rng.stream_id + k), mc_count, threads))
        for k, d in zip(range(1, n + 1), family)
    ]
    sq_dev = 0.0
    for k, d in zip(range(1, n + 1), family):
        # E(k^-1/2 - sqrt X)^2 = 1/k - 2 k^-1/2 E X^1/2 + E X
        sq_dev += 1.0 / k - 2.0 * dist.moment(d, 0.5) / math.sqrt(k) + dist.mean(d)
    sq_dev = max(sq_dev, 0.0)
    rows = []
    for t in t_grid:
        t = float(t)
        s = complex(0.5, t)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", PrecisionWarning)
            z = zeta_eval(s)
        acc = np.zeros(mc_count, dtype=complex)
        for k in range(1, n + 1):
            if w[k - 1] != 0.0:
                acc += w[k - 1] * (np.exp(-s * math.log(k)) - np.exp(s * logs[k - 1]))
        v = np.abs(acc * z / s) ** 2
        rows.append(
            VnRow(
                t,
                float(np.mean(v)),
                float(np.std(v, ddof=1) / math.sqrt(mc_count)),
                4.0 * n * sq_dev * abs(z) ** 2,
            )
        )
    return rows
