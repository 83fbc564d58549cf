class DmBeamError(Exception):
    """Base class for simulator errors."""


class InvalidGridError(DmBeamError, ValueError):
    pass


class PatternSchemaError(DmBeamError, ValueError):
    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class NullPortError(DmBeamError, ValueError):
    """A port's pattern is (numerically) zero at the requested direction."""

    def __init__(self, port, magnitude):
        self.port = port
        self.magnitude = magnitude
        super().__init__(f"port {port.name} is below the null threshold (|E|={magnitude:.3g})")


class DegeneratePatternError(DmBeamError, ValueError):
    pass


class FramingError(DmBeamError, ValueError):
    pass


class InsecureConfigurationError(DmBeamError, ValueError):
    pass


class ConfigError(DmBeamError, ValueError):
    pass
