"""
Exception hierarchy shared by the backend modules.
"""


class SparseBellmanError(Exception):
    """Base class for all errors raised by this package."""
    pass


class DomainError(SparseBellmanError, ValueError):
    """Raised when an input lies outside the domain of an operation."""
    pass


class CarlesonError(DomainError):
    """Raised when a selection sequence would violate the 2-Carleson condition."""
    pass


class ResourceError(SparseBellmanError):
    """Raised when a request exceeds a hard resource limit (depth, tree size)."""
    pass
