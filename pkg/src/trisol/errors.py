"""Exception types shared across the toolkit."""


class TrisolError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(TrisolError):
    """Run configuration is malformed or violates a module precondition."""


class DimensionTooSmallError(TrisolError, ValueError):
    """Closed-form embedding constants require dimension N >= 3."""


class ExponentOutOfRangeError(TrisolError, ValueError):
    """Exponent q outside the admissible range [1, 2N/(N-2))."""


class InvalidParameterError(TrisolError, ValueError):
    """A problem parameter violates a theorem-side precondition."""


class EmptyInteriorError(TrisolError):
    """No grid node is strictly inside the domain at this resolution."""


class BallNotContainedError(TrisolError):
    """The requested support ball B(x0, D) is not contained in the domain."""


class SingularIntegralError(TrisolError):
    """Adaptive quadrature detected a non-integrable singularity."""


class EmptyIntervalError(TrisolError):
    """The admissible parameter interval is empty (lhs <= rhs)."""


class PathCollapseError(TrisolError):
    """Mountain-pass path has no separating energy ridge."""


class NumericalError(TrisolError):
    """A numerical consistency check failed at run time."""
