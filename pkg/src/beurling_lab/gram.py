"""Gram systems and least-squares projection onto finite families.

A ``GramSystem`` stores the matrix of basis inner products, the inner
products of the target with each basis element, and certified bounds on
every entry. ``solve`` projects the target with an eigenvalue-truncated
pseudo-inverse; ``residual_with_coeffs`` evaluates the squared distance for
coefficients chosen elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import DEFAULT_TOL, inner_chi_rho, inner_rho_rho
from .errors import DataError, DomainError
from .parallel import pmap

DEFAULT_CUTOFF = 1e-12


@dataclass(frozen=True)
class GramSystem:
    g: np.ndarray
    b: np.ndarray
    target_norm_sq: float
    entry_err: np.ndarray
    rhs_err: np.ndarray
    target_err: float = 0.0
    labels: tuple = field(default_factory=tuple)

    def __post_init__(self):
        g = np.array(self.g, dtype=float)
        b = np.array(self.b, dtype=float)
        n = b.shape[0]
        if g.shape != (n, n):
            raise DataError(f"Gram matrix shape {g.shape} does not match rhs length {n}")
        if not (np.all(np.isfinite(g)) and np.all(np.isfinite(b))):
            raise DataError("non-finite entries in Gram system")
        if not np.array_equal(g, g.T):
            raise DataError("Gram matrix is not symmetric")
        if n and not np.all(np.diag(g) > 0):
            raise DataError("Gram diagonal must be strictly positive")
        if not self.target_norm_sq > 0:
            raise DataError("target norm must be positive")
        g.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "entry_err", np.asarray(self.entry_err, dtype=float))
        object.__setattr__(self, "rhs_err", np.asarray(self.rhs_err, dtype=float))
        object.__setattr__(self, "target_norm_sq", float(self.target_norm_sq))

    @property
    def n(self) -> int:
        return self.b.shape[0]

    def leading(self, k: int) -> "GramSystem":
        """The system restricted to the first ``k`` basis elements."""
        return GramSystem(
            self.g[:k, :k],
            self.b[:k],
            self.target_norm_sq,
            self.entry_err[:k, :k],
            self.rhs_err[:k],
            self.target_err,
            tuple(self.labels[:k]),
        )


@dataclass(frozen=True)
class DistanceReport:
    coeffs: np.ndarray
    distance_sq: float
    reg_cutoff: float
    dropped_modes: int
    condition_estimate: float
    certified_slack: float
    clamped: bool = False

    def to_dict(self) -> dict:
        return {
            "coeffs": [float(c) for c in self.coeffs],
            "distance_sq": self.distance_sq,
            "reg_cutoff": self.reg_cutoff,
            "dropped_modes": self.dropped_modes,
            "condition_estimate": self.condition_estimate,
            "certified_slack": self.certified_slack,
            "clamped": self.clamped,
        }


def coefficient_slack(sys: GramSystem, coeffs) -> float:
    """First-order bound on the residual error caused by the entry errors."""
    c1 = float(np.sum(np.abs(coeffs)))
    e_g = float(np.max(sys.entry_err)) if sys.n else 0.0
    e_b = float(np.max(sys.rhs_err)) if sys.n else 0.0
    return c1 * c1 * e_g + 2.0 * c1 * e_b + sys.target_err


def residual_with_coeffs(sys: GramSystem, coeffs) -> float:
    """||target - sum c_k phi_k||^2 for the given coefficients."""
    c = np.asarray(coeffs, dtype=float)
    if c.shape != (sys.n,):
        raise DataError(f"expected {sys.n} coefficients, got shape {c.shape}")
    return float(sys.target_norm_sq - 2.0 * (sys.b @ c) + c @ sys.g @ c)


def solve(sys: GramSystem, cutoff: float = DEFAULT_CUTOFF) -> DistanceReport:
    """Project the target onto the span of the basis.

    Eigenmodes below ``cutoff * max eigenvalue`` (and any non-positive ones)
    are discarded. A computed distance that dips below zero is clamped and
    flagged.
    """
    if not 0.0 <= cutoff < 1.0:
        raise DomainError(f"cutoff must lie in [0, 1), got {cutoff}")
    if sys.n == 0:
        return DistanceReport(np.zeros(0), sys.target_norm_sq, cutoff, 0, 1.0, sys.target_err)
    w, v = np.linalg.eigh(sys.g)
    lam_max = float(w[-1])
    keep = w > max(cutoff * lam_max, 0.0)
    wk, vk = w[keep], v[:, keep]
    proj = vk.T @ sys.b
    coeffs = vk @ (proj / wk)
    dist = float(sys.target_norm_sq - np.sum(proj * proj / wk))
    slack = coefficient_slack(sys, coeffs)
    clamped = dist < 0.0
    return DistanceReport(
        coeffs=coeffs,
        distance_sq=0.0 if clamped else dist,
        reg_cutoff=cutoff,
        dropped_modes=int(np.count_nonzero(~keep)),
        condition_estimate=lam_max / float(wk[0]),
        certified_slack=slack,
        clamped=clamped,
    )


def determinant_distance(sys: GramSystem) -> float:
    """Squared distance as det Gram(target, basis) / det Gram(basis).

    Only sensible for small, well-conditioned systems.
    """
    n = sys.n
    full = np.empty((n + 1, n + 1))
    full[0, 0] = sys.target_norm_sq
    full[0, 1:] = sys.b
    full[1:, 0] = sys.b
    full[1:, 1:] = sys.g
    return float(np.linalg.det(full) / np.linalg.det(sys.g)) if n else sys.target_norm_sq


def assemble_deterministic(thetas, tol: float = DEFAULT_TOL, threads: int = 1) -> GramSystem:
    """Gram system of rho_theta for the given dilations, target chi."""
    thetas = [float(t) for t in thetas]
    if not thetas:
        raise DomainError("at least one dilation is required")
    if min(thetas) <= 0:
        raise DomainError("dilations must be positive")
    n = len(thetas)
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    entries = pmap(lambda p: inner_rho_rho(thetas[p[0]], thetas[p[1]], tol), pairs, threads)
    rhs = pmap(lambda th: inner_chi_rho(th, tol), thetas, threads)
    g = np.empty((n, n))
    err = np.empty((n, n))
    for (i, j), bv in zip(pairs, entries):
        g[i, j] = g[j, i] = bv.value
        err[i, j] = err[j, i] = bv.err
    return GramSystem(
        g=g,
        b=np.array([r.value for r in rhs]),
        target_norm_sq=1.0,
        entry_err=err,
        rhs_err=np.array([r.err for r in rhs]),
        labels=tuple(f"rho({th:g})" for th in thetas),
    )
