"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the physical or mathematical domain of an operation."""


class SingularSystemError(ArithmeticError):
    """The normal equations of a least-squares step could not be solved."""


class ConfigError(ValueError):
    """Invalid run configuration.

    Carries the offending key and, when known, the 1-based line number.
    """

    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class SpectrumFormatError(ValueError):
    """A spectrum file does not follow the two-column CSV layout."""

    def __init__(self, message, row=None):
        self.row = row
        super().__init__(f"row {row}: {message}" if row is not None else message)
