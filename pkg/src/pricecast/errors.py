"""Exception taxonomy; the CLI maps these to distinct exit codes."""


class ConfigError(ValueError):
    """Invalid configuration; message names the offending field."""


class DataError(ValueError):
    """Unusable input data (missing file, bad row, impossible split)."""


class NumericError(ArithmeticError):
    """Numerical failure during computation (diverged training, NaN loss)."""
