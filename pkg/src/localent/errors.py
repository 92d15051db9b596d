"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class GridError(RuntimeError):
    """Spectral grid cannot faithfully represent the requested state or evolution."""


class FitError(RuntimeError):
    """Dispersion-curve fit cannot be performed on the given series."""
