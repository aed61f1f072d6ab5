"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Array dimensions do not satisfy an operation's contract."""


class StateError(RuntimeError):
    """Operation called out of order, e.g. backward before forward."""


class NumericError(ArithmeticError):
    """A NaN or infinity surfaced where only finite values are allowed."""


class FormatError(ValueError):
    """A serialized weight file is malformed or inconsistent."""


class IngestionError(RuntimeError):
    """Dataset directory is missing, empty, or otherwise unreadable."""


class ConfigError(ValueError):
    """Run configuration is invalid or cannot be honored."""
