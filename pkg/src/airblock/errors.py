"""Exception hierarchy shared by all modules."""


class AirblockError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(AirblockError, ValueError):
    """A numeric input was NaN/inf or otherwise outside its domain."""


class DegenerateGeometryError(AirblockError, ValueError):
    """Two points that must be distinct coincide."""


class TargetReachedError(AirblockError):
    """The airplane sits on its target, so no cruising direction exists."""


class SafetyViolationError(AirblockError):
    """The pair is already inside the safety margin (h < 0)."""


class ConfigError(AirblockError, ValueError):
    """A scenario configuration breaks one of its invariants."""
