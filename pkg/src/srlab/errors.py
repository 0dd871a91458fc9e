"""Exception types raised by srlab."""


class SRLabError(Exception):
    """Base class for all srlab errors."""


class InvalidArgumentError(SRLabError, ValueError):
    pass


class DegenerateInputError(SRLabError, ValueError):
    """Input has no variance / no nonzero sample where one is required."""


class NumericOverflowError(SRLabError, ArithmeticError):
    pass


class AudioFormatError(SRLabError, ValueError):
    pass


class OutOfModelError(SRLabError, ValueError):
    """Parameters fall outside the validity domain of the analytic model."""


class WrongOperationError(SRLabError, TypeError):
    pass


class NoOptimumError(SRLabError):
    pass


class ConfigError(SRLabError):
    """Invalid experiment configuration (CLI exit code 2)."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
