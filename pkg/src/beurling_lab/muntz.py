"""The Muntz transform Pf(t) = sum_k f(kt) - (1/t) int_0^inf f.

For the survival function f(x) = P(X >= x) of a positive law, Pf = -E{X/t};
``identity_gap`` measures that identity against Monte Carlo.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import distributions as dist
from .errors import CapabilityError, DataError, DomainError, ResourceError
from .rng import RngStream

DEFAULT_TOL = 1e-10
# pairs (t, k) evaluated per vectorized survival call
_PAIR_CHUNK = 1 << 21


@dataclass(frozen=True)
class SurvivalKernel:
    law: object  # a Distribution


@dataclass(frozen=True)
class SampledKernel:
    """Nonincreasing kernel known on a grid, linear in between.

    Left of x[0] the kernel is taken constant equal to f[0]; right of the
    grid it is zero, which requires f[-1] == 0 for a certified tail.
    """

    x: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        f = np.array(self.f, dtype=float)
        if x.ndim != 1 or x.shape != f.shape or x.size < 2:
            raise DataError("sampled kernel needs two equal-length columns with at least 2 rows")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(f))):
            raise DataError("sampled kernel has non-finite values")
        if x[0] < 0 or np.any(np.diff(x) <= 0):
            raise DataError("kernel grid must be nonnegative and strictly increasing")
        if np.any(np.diff(f) > 0) or f[-1] < 0:
            raise DataError("kernel values must be nonnegative and nonincreasing")
        x.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "f", f)

    @classmethod
    def from_csv(cls, path) -> "SampledKernel":
        with open(Path(path), newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            raise DataError(f"{path}: empty kernel file")
        if [c.strip() for c in rows[0]] != ["x", "f"]:
            raise DataError(f"{path}: expected header 'x,f'")
        try:
            data = np.array([[float(a), float(b)] for a, b in rows[1:]])
        except ValueError as exc:
            raise DataError(f"{path}: {exc}") from None
        if data.size == 0:
            raise DataError(f"{path}: no data rows")
        return cls(data[:, 0], data[:, 1])

    def integral(self) -> tuple[float, float]:
        """Trapezoid value of int f and a certified half-width (monotonicity)."""
        dx = np.diff(self.x)
        upper = float(self.x[0] * self.f[0] + np.sum(dx * self.f[:-1]))
        lower = float(self.x[0] * self.f[0] + np.sum(dx * self.f[1:]))
        return 0.5 * (upper + lower), 0.5 * (upper - lower)


KernelSpec = SurvivalKernel | SampledKernel


def survival_series(d, t, tol: float = DEFAULT_TOL, budget: int = 20_000_000) -> np.ndarray:
    """Pf(t) for f the survival function of ``d``, on an array of t.

    Terms run up to k = m with tail_mean(d, m t) / t <= tol, which bounds the
    dropped part of the sum since the survival function is nonincreasing.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(~(t > 0)):
        raise DomainError("t must be positive")
    if isinstance(d, dist.PointMass):
        x = d.theta / t
        return -(x - np.floor(x))
    m_x = dist.mean(d)
    x_cut = dist.tail_cut(d, tol * float(t.min()))
    terms = np.maximum(np.ceil(x_cut / t), 1.0).astype(np.int64)
    total_terms = int(terms.sum())
    if total_terms > budget:
        raise ResourceError(
            f"Muntz series needs {total_terms} survival evaluations (budget {budget})",
            achievable_tol=None,
        )
    sums = np.empty(t.size)
    start = 0
    while start < t.size:
        # grow the batch until it holds about _PAIR_CHUNK pairs
        stop = start + 1
        acc = int(terms[start])
        while stop < t.size and acc + terms[stop] <= _PAIR_CHUNK:
            acc += int(terms[stop])
            stop += 1
        tt = t[start:stop]
        mm = terms[start:stop]
        owner = np.repeat(np.arange(stop - start), mm)
        offsets = np.concatenate(([0], np.cumsum(mm)[:-1]))
        k = np.arange(acc) - np.repeat(offsets, mm) + 1
        s = dist.survival(d, k * tt[owner])
        sums[start:stop] = np.add.reduceat(s, offsets)
        start = stop
    return sums - m_x / t


def muntz_transform(kernel: KernelSpec, t: float, tol: float = DEFAULT_TOL) -> float:
    t = float(t)
    if not (t > 0):
        raise DomainError(f"t must be positive, got {t!r}")
    if isinstance(kernel, SurvivalKernel):
        return float(survival_series(kernel.law, np.array([t]), tol)[0])
    if isinstance(kernel, SampledKernel):
        if kernel.f[-1] != 0.0:
            raise CapabilityError(
                "sampled kernel does not vanish at the end of its grid; the tail of "
                "the series and of the integral cannot be certified"
            )
        integral, _ = kernel.integral()
        m = int(math.floor(kernel.x[-1] / t))
        k = np.arange(1, m + 1, dtype=float)
        vals = np.interp(k * t, kernel.x, kernel.f, left=float(kernel.f[0]), right=0.0)
        return math.fsum(vals) - integral / t
    raise DomainError(f"not a kernel: {kernel!r}")


@dataclass(frozen=True)
class GapRow:
    t: float
    gap: float
    mc_stderr: float
    mc_mean: float
    transform: float


def identity_gap(d, t_grid, mc_count: int, rng: RngStream, threads: int = 1) -> list[GapRow]:
    """|MC E{X/t} + Pf(t)| per grid point, with the Monte Carlo standard error."""
    if mc_count < 10_000:
        raise DomainError(f"mc_count must be >= 10^4, got {mc_count}")
    t_grid = [float(t) for t in t_grid]
    means, errs = dist.mc_mean_beurling(d, t_grid, mc_count, rng, threads)
    pf = survival_series(d, np.array(t_grid), DEFAULT_TOL)
    return [
        GapRow(t, abs(float(m + p)), float(e), float(m), float(p))
        for t, m, e, p in zip(t_grid, means, errs, pf)
    ]


def sampled_from_law(d, x_max: float, points: int) -> SampledKernel:
    """Tabulate the survival function of ``d`` on a uniform grid, zero at the end."""
    x = np.linspace(0.0, x_max, points)
    f = np.asarray(dist.survival(d, x), dtype=float)
    f[-1] = 0.0
    return SampledKernel(x, np.minimum.accumulate(f))
