"""Exception hierarchy shared by all modules.

Errors are grouped by what went wrong so that the CLI can map them to exit
codes: window/enumeration problems (3) versus bad input (2).
"""


class ApkError(Exception):
    """Base class for all library errors."""


class UsageError(ApkError, ValueError):
    """Invalid arguments that no amount of window/enumeration could fix."""


class WindowError(ApkError):
    """The finite window or enumeration box is too small for the query."""


class DiscMismatch(UsageError):
    pass


class DimMismatch(UsageError):
    pass


class InsufficientWindow(WindowError):
    pass


class EmptyPatch(WindowError):
    pass


class EnumerationTooSmall(WindowError):
    pass


class SingularBasis(UsageError):
    pass


class InjectivityViolation(UsageError):
    pass


class DensityNotWitnessed(WindowError):
    pass


class NotFound(WindowError):
    pass


class NoDecay(WindowError):
    pass


class NoPairs(WindowError):
    pass


class R0TooSmall(UsageError):
    pass


class NotRelativelyDense(WindowError):
    pass


class CocycleViolation(ApkError):
    pass


class R0ExceedsWindow(WindowError):
    pass


class BandHypothesisFails(ApkError):
    pass


class PreconditionError(UsageError):
    pass


class SingularMap(UsageError):
    pass


class NotExpansive(UsageError):
    pass


class InfeasibleParams(UsageError):
    pass


class NotDeloneSupport(UsageError):
    pass


class TooManyClasses(UsageError):
    pass
