"""Exception hierarchy shared across the package.

The CLI maps these onto its exit codes: UsageError -> 2, RegimeError -> 3,
CheckFailure / ConsistencyError -> 4, ResourceLimitError -> 5.
"""


class DcwError(Exception):
    """Base class for all package errors."""


class UsageError(DcwError):
    """Malformed request: bad argument values, unknown names."""


class DimensionError(UsageError):
    """Operands live on different qubit/replica counts."""


class SpecError(UsageError):
    """A monomial specification violates its structural invariants."""


class RegimeError(DcwError):
    """Parameters are outside the regime where the quantity is defined."""


class ConditioningError(DcwError):
    """A matrix inverse failed its residual tolerance.

    Carries the measured residual (and condition estimate when available)
    in the message.
    """


class ConsistencyError(DcwError):
    """An internal cross-check failed; indicates a bug, not bad input."""


class CheckFailure(DcwError):
    """A verification suite check did not pass."""


class ResourceLimitError(DcwError):
    """Request exceeds the configured memory/size budget."""
