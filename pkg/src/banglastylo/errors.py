"""Error taxonomy shared across the package.

The CLI maps these onto process exit codes, so raising the right class
matters more than the message text: ConfigError -> 1, DataError -> 2,
NumericError -> 3.
"""


class ConfigError(ValueError):
    """Invalid configuration value or combination."""


class DataError(ValueError):
    """Unreadable, malformed, or structurally unusable input data."""


class NumericError(RuntimeError):
    """Non-finite values or numerically degenerate states (e.g. empty vocabulary)."""
