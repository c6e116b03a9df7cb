"""Error classes. Each family maps to a CLI exit code."""


class IntradayKurtosisError(Exception):
    exit_code = 1


class ParseError(IntradayKurtosisError):
    """Malformed input (bad timestamp, bad number, missing header)."""

    exit_code = 2

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DataError(IntradayKurtosisError):
    """Well-formed input that violates a data invariant."""

    exit_code = 3

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ShortSessionError(DataError):
    pass


class InsufficientPeriodsError(DataError):
    pass


class DegenerateDayError(DataError):
    """A statistic is undefined for this day (zero scale, empty group...)."""

    def __init__(self, message, statistic=None):
        self.statistic = statistic
        if statistic is not None:
            message = f"{statistic}: {message}"
        super().__init__(message)


class ConfigError(IntradayKurtosisError):
    exit_code = 4


class CalibrationError(IntradayKurtosisError):
    """Root finding failed to converge."""

    exit_code = 3

    def __init__(self, message, residual=None, trace=None):
        self.residual = residual
        self.trace = trace or []
        super().__init__(message)


class NoSolutionError(CalibrationError):
    """Targets are outside what a two-Gaussian mixture can produce."""
