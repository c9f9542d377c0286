"""Exception types shared across the package."""


class GeodesyError(Exception):
    """Base class for all package errors."""


class DomainError(GeodesyError):
    """A vertex or edge lies outside the environment's box."""


class TargetError(GeodesyError):
    """A target set is empty or does not intersect the box/mask."""


class UnreachableError(GeodesyError):
    """Requested vertex cannot reach the target under the mask."""


class StructureError(GeodesyError):
    """A structural invariant failed (stuck walk, mismatched environment)."""


class MarginError(GeodesyError):
    """Experiment parameters violate the boundary-margin safety policy."""


class ConfigError(GeodesyError):
    """An experiment configuration is malformed."""
