"""Deterministic two-dimensional airplane encounter simulator.

Closed-form CBF safety filtering, blocking/deadlock/livelock analysis and a
communication-free blocking resolution strategy.
"""

from airblock.errors import (
    AirblockError,
    ConfigError,
    DegenerateGeometryError,
    InvalidInputError,
    SafetyViolationError,
    TargetReachedError,
)

__version__ = "0.1.0"

__all__ = [
    "AirblockError",
    "ConfigError",
    "DegenerateGeometryError",
    "InvalidInputError",
    "SafetyViolationError",
    "TargetReachedError",
    "__version__",
]
