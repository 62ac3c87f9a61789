"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigurationError(ValueError):
    """Inconsistent configuration (e.g. sampler method vs measure kind)."""


class UnsupportedDimensionError(ValueError):
    """Operation not available in the requested space dimension."""
