"""Exception types shared across the library."""


class CircneedletsError(Exception):
    """Base class for all library-specific errors."""


class DomainError(CircneedletsError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class ResourceLimitError(CircneedletsError):
    """A derived quantity (arc count, truncation index) exceeds sane limits."""


class QuadratureResolutionError(CircneedletsError, ValueError):
    """The quadrature grid is too coarse to resolve the integrand."""


class CoverageError(CircneedletsError):
    """A resolution-level window misses a non-negligible share of the energy."""

    def __init__(self, message, missing_mass):
        super().__init__(message)
        self.missing_mass = missing_mass


class InsufficientPilotError(CircneedletsError, ValueError):
    """Too few pilot replications to calibrate a threshold."""


class DegenerateSampleError(CircneedletsError, ValueError):
    """A statistic is undefined for the supplied sample (e.g. constant data)."""


class ConfigurationError(CircneedletsError, ValueError):
    """Inconsistent configuration values."""
