"""Exception taxonomy shared by all modules.

The CLI maps these onto exit codes: ValidationError (and subclasses) -> 2,
CapacityError -> 3, ConvergenceError -> 4.
"""


class FidecayError(Exception):
    """Base class for all package errors."""


class ValidationError(FidecayError):
    """Input violates a documented precondition or schema."""


class CapacityError(FidecayError):
    """Requested problem size exceeds the configured maximum."""


class ConvergenceError(FidecayError):
    """An iterative scheme failed to reach its tolerance within budget."""


class FitError(ValidationError):
    """Curve fitting rejected the input (too few points, no decay)."""


class PeakError(ValidationError):
    """No qualifying peak in the curve."""


class RangeError(ValidationError):
    """A curve does not cover the requested analysis range."""


class DegeneratePhaseError(ValidationError):
    """Sine sampling would be (near-)commensurate with the sample clock."""
