"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the region where a quantity is defined."""


class ConvergenceError(RuntimeError):
    """An iterative numerical method failed to meet its tolerance."""
