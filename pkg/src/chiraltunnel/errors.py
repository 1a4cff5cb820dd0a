"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid parameter or configuration value."""


class DegenerateSystemError(ArithmeticError):
    """The frequency-domain linear system is singular at ``frequency``."""

    def __init__(self, frequency, detail="singular coupled-mode system"):
        self.frequency = frequency
        super().__init__(f"{detail} at f={frequency!r} GHz")


class ParseError(ValueError):
    """Malformed input file. ``lineno`` is 1-based, or None when not line specific."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class FitError(ValueError):
    """A calibration fit cannot proceed with the supplied data."""
