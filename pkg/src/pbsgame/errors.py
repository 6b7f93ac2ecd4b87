"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration value (CLI exit code 2)."""


class CodecError(ValueError):
    """Malformed chromosome bit string."""


class NumericalError(RuntimeError):
    """A numerical routine failed to converge (CLI exit code 4)."""
