"""Error hierarchy shared by the library and the command-line front end."""


class UplinkError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for this error."""

    exit_code = 1


class ConfigError(UplinkError, ValueError):
    exit_code = 2

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DomainError(UplinkError, ValueError):
    """Inputs outside the mathematical domain of an operation."""

    exit_code = 2


class NumericalError(UplinkError, ArithmeticError):
    exit_code = 3

    def __init__(self, message, *, trial=None, bracket=None):
        self.trial = trial
        self.bracket = bracket
        super().__init__(message)


class DegenerateError(NumericalError):
    """A normalization would divide by zero (e.g. every V term vanishes)."""


class CapacityError(UplinkError):
    exit_code = 4

    def __init__(self, message, count=None):
        self.count = count
        super().__init__(message)
