"""Exception hierarchy shared by all modules.

The CLI maps every ``LabError`` to exit code 3 and serialises it with
``to_dict``; anything else is a bug.
"""

from __future__ import annotations


class LabError(Exception):
    kind = "error"

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.details = details

    def to_dict(self) -> dict:
        out = {"error": self.kind, "message": str(self)}
        out.update({k: v for k, v in self.details.items()})
        return out


class DomainError(LabError, ValueError):
    kind = "domain"


class ResourceError(LabError):
    """Requested accuracy exceeds a configured budget.

    ``achievable_tol`` carries the best tolerance reachable within budget.
    """

    kind = "resource"


class DataError(LabError, ValueError):
    kind = "data"


class CapabilityError(LabError):
    kind = "capability"


class ContractError(LabError):
    kind = "contract"


class RangeError(LabError, OverflowError):
    kind = "range"


class PoleError(DomainError):
    kind = "pole"


class PrecisionWarning(UserWarning):
    """Two independent evaluation routes disagree beyond their target."""
