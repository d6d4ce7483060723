"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration (CLI exit code 2)."""


class NumericalError(RuntimeError):
    """A numerical routine failed or violated a consistency bound (CLI exit code 3)."""
