"""Exception hierarchy for spinmeter.

Library code raises these; only ``main.py`` turns them into exit codes.
"""


class SpinmeterError(Exception):
    """Base class for every error raised by spinmeter."""


class ConfigurationError(SpinmeterError, ValueError):
    """Physical or grid parameters outside the supported range."""


class AsymptoticRegimeError(ConfigurationError):
    """An asymptotic formula was requested outside its regime of validity."""


class InvalidStateError(SpinmeterError, ValueError):
    """A field or density matrix violates its normalisation invariants."""


class DomainError(SpinmeterError, ValueError):
    """Argument outside the mathematical domain of a function."""


class ResourceError(SpinmeterError):
    """Request would exceed the exhaustive-enumeration budget."""


class NumericalError(SpinmeterError, ArithmeticError):
    """Non-finite values met during a numerical evaluation."""

    def __init__(self, message: str, node: float | None = None):
        super().__init__(message)
        self.node = node


class ConfigError(SpinmeterError):
    """Config text that cannot be parsed or validated.

    ``key`` and ``line`` point at the offending entry when known.
    """

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        self.key = key
        self.line = line
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(f"{message}{suffix}")
        self.message = message
