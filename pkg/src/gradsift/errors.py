"""Exception taxonomy shared across the package.

The CLI maps these to distinct exit codes, so raise the most specific one.
"""


class ConfigError(Exception):
    """Invalid or unknown configuration (keys, flag values, ranges)."""


class DataError(Exception):
    """Dataset cannot be loaded or fails a structural precondition."""


class NumericalError(Exception):
    """A computation produced non-finite values."""
