"""Exception hierarchy shared by the library and the CLI exit-code mapping."""


class SpectralShiftError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class ConfigError(SpectralShiftError, ValueError):
    """A job configuration is incomplete or malformed."""

    exit_code = 2


class PreconditionError(SpectralShiftError, ValueError):
    """An operation was called outside its stated preconditions."""

    exit_code = 3


class VerificationError(SpectralShiftError):
    """A checked bound or guarantee did not hold."""

    exit_code = 4


class IterationLimitError(SpectralShiftError):
    """Residual iteration hit its cap while still finding new coefficients."""

    exit_code = 5

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
