"""Exception hierarchy shared by all qhahn modules."""


class QHahnError(Exception):
    """Base class for all package-specific errors."""


class DomainError(QHahnError, ValueError):
    """Argument outside the mathematical domain of the operation."""


class RangeError(QHahnError, ValueError):
    """Requested target value is outside the attainable range.

    Carries the attainable open interval in ``.interval`` when known.
    """

    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


class PoleError(QHahnError, ArithmeticError):
    """A factor of an infinite product vanished exactly."""


class BranchError(QHahnError, ArithmeticError):
    """A factor landed on the closed negative real axis where the
    principal logarithm is discontinuous; the caller must pick a safer
    contour or use a real-part-only evaluation."""


class ConvergenceError(QHahnError, ArithmeticError):
    """A truncated series/product hit its term cap before meeting the
    requested tolerance."""


class DegenerateError(QHahnError, ValueError):
    """Parameters collapse a distribution to a degenerate case that the
    caller asked to treat as an error."""


class NormalizationError(QHahnError, ArithmeticError):
    """A probability table failed its normalization self-check."""


class InvariantError(QHahnError, AssertionError):
    """An internal dynamical invariant was violated (bug trap)."""


class WindowError(QHahnError, ValueError):
    """A site index falls outside the represented lattice window."""


class NonConvergence(QHahnError, ArithmeticError):
    """Doubling the quadrature order moved a determinant by more than
    the requested tolerance."""


class PoleProximityError(QHahnError, ArithmeticError):
    """A quadrature node landed too close to a pole of the integrand."""


class ConfigError(QHahnError, ValueError):
    """Invalid or unknown experiment configuration."""
