"""Exception hierarchy; each class maps to a CLI exit code."""


class HadamardMPError(Exception):
    exit_code = 1


class ConfigurationError(HadamardMPError, ValueError):
    exit_code = 2


class DimensionError(ConfigurationError):
    pass


class DomainError(ConfigurationError):
    pass


class NumericalError(HadamardMPError, ArithmeticError):
    exit_code = 3


class ResourceGuardError(HadamardMPError):
    """Pre-flight refusal: the requested work exceeds a configured cap."""

    exit_code = 4

    def __init__(self, message: str, estimate: float | None = None):
        super().__init__(message)
        self.estimate = estimate
