"""Deterministic simulator for a cable-driven rowing arm with a passive paddle.

The package covers chain kinematics, blade-element paddle drag, stroke
generation, a lumped thermal model of the gallium stiffness joints, a
rail-constrained vehicle model and the sweep / calibration harnesses built on
top of them.
"""

from vspm.errors import (
    CalibrationError,
    ConfigError,
    DomainError,
    InfeasibleProfileError,
    NumericalDivergenceError,
    VSPMError,
)

__version__ = "0.1.0"

__all__ = [
    "CalibrationError",
    "ConfigError",
    "DomainError",
    "InfeasibleProfileError",
    "NumericalDivergenceError",
    "VSPMError",
    "__version__",
]
