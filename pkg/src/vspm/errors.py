"""Exception hierarchy shared by every module."""


class VSPMError(Exception):
    """Base class for all simulator errors."""


class ConfigError(VSPMError, ValueError):
    """Invalid configuration or parameter value."""


class DomainError(VSPMError, ValueError):
    """Argument outside the domain an operation is defined on."""


class InfeasibleProfileError(ConfigError):
    """Acceleration-limited stroke cannot cover the commanded sweep in time."""


class CalibrationError(VSPMError):
    """A calibration target cannot be reached within the search bounds."""


class NumericalDivergenceError(VSPMError, ArithmeticError):
    """Integrator produced a non-finite state."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step
