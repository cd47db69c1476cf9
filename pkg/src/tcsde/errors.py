"""Exception types raised by the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class NumericError(ArithmeticError):
    """A computation produced NaN/Inf or failed to converge."""


class ResourceError(RuntimeError):
    """A safety cap on work or memory was exceeded."""


class UnsupportedError(RuntimeError):
    """The requested combination of inputs has no implementation."""


class ConfigError(ValueError):
    """A configuration file failed schema validation.

    ``field`` is the dotted path of the offending key and ``line`` the
    1-based line in the source file when known.
    """

    def __init__(self, field: str, message: str, line: int | None = None):
        self.field = field
        self.line = line
        where = f"{field}" if line is None else f"{field} (line {line})"
        super().__init__(f"{where}: {message}")
