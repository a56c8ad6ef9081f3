"""Exception hierarchy.

Every failure mode that carries mathematical meaning gets its own class so
callers (and the CLI) can distinguish "your input is outside the domain"
from "an internal certificate failed".
"""


class AffineLabError(Exception):
    """Base class for all library errors."""


class DomainError(AffineLabError):
    """Argument outside the domain of the map or operation."""


class FlatPieceError(AffineLabError):
    """A slope-zero piece where measure preservation is required."""


class PieceBudgetError(AffineLabError):
    """A composition or iterate exceeded the configured piece cap."""


class ContinuityError(AffineLabError):
    """A window perturbation would create a jump at a window endpoint."""


class WindowError(AffineLabError):
    """Window not contained in [0,1] or otherwise inadmissible."""


class EquivalenceError(AffineLabError):
    """A candidate window graph is not lambda-equivalent to the original.

    Carries a witness cell and the two branch sums when available.
    """

    def __init__(self, message, cell=None, lhs=None, rhs=None):
        super().__init__(message)
        self.cell = cell
        self.lhs = lhs
        self.rhs = rhs


class EndpointError(AffineLabError):
    """Window graph endpoints do not match the host map."""


class SearchFailureError(AffineLabError):
    """A constructive search (e.g. boundary-repair window size) gave up."""


class RepairBudgetError(AffineLabError):
    """make_transverse could not finish within its perturbation budget."""

    def __init__(self, message, remaining=None):
        super().__init__(message)
        self.remaining = remaining or []


class NotPeriodicError(AffineLabError):
    """Point is not periodic; carries the exact defect f^k(x) - x."""

    def __init__(self, message, defect=None):
        super().__init__(message)
        self.defect = defect


class BoundaryFixError(AffineLabError):
    """classify_transverse asked about a fixed point at 0 or 1."""


class PartitionError(AffineLabError):
    """build_partition could not satisfy clauses (i)-(iii)."""


class ChainBreakError(AffineLabError):
    """Covering step of the interval-chain tracer failed.

    Under the kit preconditions this cannot happen; seeing it means a
    precondition was violated.
    """


class ScheduleError(AffineLabError):
    """Asymptotic pseudo-orbit schedule incompatible with a tower."""


class AtomicityError(AffineLabError):
    """cdf_homeo given an atomic measure (the CDF is not injective)."""


class SupportError(AffineLabError):
    """cdf_homeo given a measure without full support."""


class StructureError(AffineLabError):
    """cantor_smooth could not exhibit a nested period-k branch family."""


class MeasureFormatError(AffineLabError):
    """Unsupported or malformed measure representation."""


class DegreeError(AffineLabError):
    """Circle operation requires a specific degree."""


class InvariantViolation(AffineLabError):
    """An exact internal certificate failed (implementation bug trap)."""
