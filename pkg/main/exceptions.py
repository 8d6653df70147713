"""
Exception hierarchy shared by every herding app.

Outcomes that are legitimate results (a target not reached, an optimizer
that stagnated) are reported in result objects, not raised.
"""


class HerdingError(Exception):
    """Base class for toolkit errors."""


class KernelInvalidError(HerdingError):
    """Kernel set violates the required sign pattern or has no root bracket."""


class KernelDomainError(HerdingError, ValueError):
    """Kernel evaluated outside its domain or produced a non-finite value."""


class NoOrbitError(HerdingError):
    """No circumvention orbit exists for the requested (kappa_c, nu)."""


class SingularityError(HerdingError):
    """Two agents coincide where a kernel is singular."""

    def __init__(self, message, kind=None, pair=None):
        super().__init__(message)
        self.kind = kind
        self.pair = pair


class DivergenceError(HerdingError):
    """Integration produced a non-finite value."""

    def __init__(self, message, last_valid_time=None):
        super().__init__(message)
        self.last_valid_time = last_valid_time


class UsageError(HerdingError):
    """An operation was called with arguments outside its contract."""


class TheoryScopeError(UsageError):
    """A diagnostic that relies on equal friction was given unequal friction."""


class ScenarioValidationError(HerdingError):
    """Scenario file failed to parse or violates an invariant."""

    def __init__(self, message, field=None, line=None):
        super().__init__(message)
        self.field = field
        self.line = line


class TrajectoryFormatError(HerdingError):
    """Trajectory file header does not match its body."""
