"""Exception hierarchy and the CLI exit codes they map to."""


class KaceError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class ConfigError(KaceError):
    """Invalid configuration or command-line usage."""

    exit_code = 1


class DataError(KaceError, ValueError):
    """Malformed input data or missing/corrupt artifacts."""

    exit_code = 2


class NotFittedError(DataError):
    """A model was used before it was fitted or loaded."""


class NumericalError(KaceError, ArithmeticError):
    """Non-finite values during training or embedding."""

    exit_code = 3
