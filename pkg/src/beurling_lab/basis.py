"""Basis families and targets shared by the distance and Plancherel code."""

from __future__ import annotations

from dataclasses import dataclass, field

from . import distributions as dist
from .errors import ContractError, DomainError

MODES = ("deterministic", "gnb", "pnb")


@dataclass(frozen=True)
class ChiTarget:
    """Indicator function of (0, 1]."""

    def label(self) -> str:
        return "chi"


@dataclass(frozen=True)
class SurvivalTarget:
    """t -> P(Y >= t) for a positive law Y."""

    law: object

    def label(self) -> str:
        return f"survival({dist.to_literal(self.law)})"


Target = ChiTarget | SurvivalTarget
CHI = ChiTarget()


@dataclass(frozen=True)
class BasisSpec:
    elements: tuple
    mode: str = "gnb"
    independence: bool = True
    target: Target = field(default=CHI)

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if self.mode not in MODES:
            raise DomainError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if not self.elements:
            raise DomainError("a basis needs at least one element")
        if self.mode == "deterministic" and not all(
            isinstance(e, dist.PointMass) for e in self.elements
        ):
            raise DomainError("deterministic mode needs point masses only")
        if self.mode == "pnb" and not self.independence:
            raise ContractError("pnb mode needs an independent family (independence=True)")
        if not isinstance(self.target, (ChiTarget, SurvivalTarget)):
            raise DomainError(f"unknown target {self.target!r}")

    @property
    def n(self) -> int:
        return len(self.elements)

    def with_mode(self, mode: str) -> "BasisSpec":
        return BasisSpec(self.elements, mode, self.independence, self.target)

    def leading(self, k: int) -> "BasisSpec":
        return BasisSpec(self.elements[:k], self.mode, self.independence, self.target)

    def labels(self) -> tuple:
        return tuple(dist.to_literal(e) for e in self.elements)
