"""Exception types raised across the package."""


class RainbowError(Exception):
    """Base class for all package errors."""


class ConfigError(RainbowError, ValueError):
    pass


class OutOfRange(RainbowError, ValueError):
    """A Doppler estimate lies outside the admissible band [-alpha, alpha]."""


class NotEnoughPeaks(RainbowError):
    pass


class SingularProjection(RainbowError, ArithmeticError):
    """Gram matrix of a candidate sinusoid set is numerically singular."""


class RootFindingFailed(RainbowError, ArithmeticError):
    pass


class DomainError(RainbowError, ValueError):
    pass


class LengthMismatch(RainbowError, ValueError):
    pass


class DegenerateSubspaceWarning(RuntimeWarning):
    """Signal/noise eigenvalue gap is too small to separate the subspaces."""
