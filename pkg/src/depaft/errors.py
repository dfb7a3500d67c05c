"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
NumericError -> 4.
"""


class ConfigError(ValueError):
    """Invalid configuration or command usage."""


class DataError(ValueError):
    """Malformed, inconsistent, or out-of-domain input data."""


class DomainError(DataError):
    """Argument outside the mathematical domain of an operation."""


class PersistenceError(DataError):
    """Model or config file that cannot be read back."""


class NumericError(RuntimeError):
    """Internal numerical failure (non-finite intermediate, sampler breakdown)."""
