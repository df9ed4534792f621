"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid scenario configuration or geometry input."""


class NumericalError(RuntimeError):
    """A numerical invariant was violated (singular system, negative power, ...)."""
