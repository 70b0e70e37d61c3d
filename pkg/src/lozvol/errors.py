"""Error and verdict types for lozvol."""

from enum import Enum
from typing import Any, Optional

from pydantic import BaseModel


class Verdict(Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    SKIPPED = "SKIPPED"


class VolumeMethod(Enum):
    EXACT_TRIANGULATION = "exact-triangulation"
    DETERMINANT_FORMULA = "determinant-formula"
    MONTE_CARLO = "monte-carlo"
    POLYTOPE_SANDWICH = "polytope-sandwich"


class SelectionMethod(Enum):
    EXACT = "exact"
    GREEDY = "greedy"


class Stage(Enum):
    """Pipeline stages in dependency order."""
    LOZANOVSKII = "lozanovskii"
    ENCLOSE = "enclose"
    LEMMA2 = "lemma2"
    THEOREM3 = "theorem3"
    ISOTROPY = "isotropy"
    LEMMA3 = "lemma3"
    QUOTIENT = "quotient"
    THEOREM4 = "theorem4"

    @classmethod
    def ordered(cls) -> list["Stage"]:
        return list(cls)


class BoundCheckReport(BaseModel):
    """Outcome of one inequality check.

    Args:
        name: Which inequality was checked (e.g. "theorem3").
        lhs: Left-hand side, already folded towards the unfavourable side.
        rhs: Right-hand side, already folded towards the unfavourable side.
        constant_used: The constant multiplying the right-hand side, if any.
        margin: rhs / lhs. A verdict passes iff margin >= 1 - tolerance.
        min_constant: Smallest constant that would still make the instance pass.
    """
    name: str
    lhs: float
    rhs: float
    constant_used: Optional[float] = None
    margin: float
    tolerance: float = 0.0
    verdict: Verdict
    min_constant: Optional[float] = None
    details: dict[str, Any] = {}

    @classmethod
    def compare(cls, name: str, lhs: float, rhs: float, tolerance: float = 0.0,
                constant_used: Optional[float] = None, min_constant: Optional[float] = None,
                **details) -> "BoundCheckReport":
        """Build a report for the inequality lhs <= rhs."""
        if lhs <= 0.0:
            margin = float("inf")
        else:
            margin = rhs / lhs
        verdict = Verdict.PASS if margin >= 1.0 - tolerance else Verdict.FAIL
        return cls(name=name, lhs=lhs, rhs=rhs, constant_used=constant_used,
                   margin=margin, tolerance=tolerance, verdict=verdict,
                   min_constant=min_constant, details=details)

    @classmethod
    def skipped(cls, name: str, reason: str) -> "BoundCheckReport":
        return cls(name=name, lhs=0.0, rhs=0.0, margin=float("inf"),
                   verdict=Verdict.SKIPPED, details={"reason": reason})

    @property
    def passed(self) -> bool:
        return self.verdict != Verdict.FAIL


class LozvolError(Exception):
    """Base class for all lozvol errors."""


class NormError(LozvolError, ValueError):
    """Malformed norm, dimension mismatch or non-finite input."""


class ConvergenceError(LozvolError):
    """The Lozanovskii solver hit its iteration limit."""

    def __init__(self, message: str, best_weights=None, residual: float = float("nan"),
                 iterations: int = 0):
        super().__init__(message)
        self.best_weights = best_weights
        self.residual = residual
        self.iterations = iterations


class RankDeficiencyError(LozvolError, ValueError):
    """A basis or map does not have the required rank."""


class EnumerationCapError(LozvolError):
    """The number of k-subsets exceeds the enumeration cap."""

    def __init__(self, count: int, cap: int):
        super().__init__(
            f"C(n,k) = {count} subsets exceeds the enumeration cap {cap}; "
            f"use method='greedy' instead"
        )
        self.count = count
        self.cap = cap


class BoundViolationError(LozvolError):
    """An inequality guaranteed by theory failed, which means a numerical bug."""

    def __init__(self, message: str, report: Optional[BoundCheckReport] = None):
        super().__init__(message)
        self.report = report


class DegenerateBodyError(LozvolError, ValueError):
    """A body is not full-dimensional or the origin is not interior."""


class VolumeEstimateError(LozvolError):
    """A volume could not be computed or estimated."""


class InstanceValidationError(LozvolError, ValueError):
    """An instance file violates the schema."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class StageError(LozvolError):
    """A pipeline stage failed; carries the partial report."""

    def __init__(self, stage: Stage, cause: Exception, partial_report=None):
        super().__init__(f"stage '{stage.value}' failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.partial_report = partial_report
