"""Exception types shared across the package."""

from __future__ import annotations


class LabError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(LabError, ValueError):
    """Input outside the mathematical domain of an operation."""


class ConstructionError(LabError):
    """A requested object cannot be constructed from the given data."""


class NoSolutionError(LabError):
    """The existence criteria rule out the requested solution.

    Carries the divergence certificate of the violated criterion when one is
    available.
    """

    def __init__(self, message: str, certificate=None):
        super().__init__(message)
        self.certificate = tuple(certificate) if certificate is not None else None


class DivergenceError(LabError):
    """An integral required to be finite diverged.

    Carries the monotone certificate sequence when available.
    """

    def __init__(self, message: str, certificate=None):
        super().__init__(message)
        self.certificate = tuple(certificate) if certificate is not None else None


class NonConvergenceError(LabError):
    """Iteration cap reached before the stopping tolerance."""

    def __init__(self, message: str, last_increment: float | None = None):
        super().__init__(message)
        self.last_increment = last_increment


class SolverFault(LabError):
    """Internal solver invariant violated (nonpositive iterate, lost monotonicity)."""


class GluingError(LabError):
    """No admissible amplitude found when joining two branches."""

    def __init__(self, message: str, worst_radius: float | None = None):
        super().__init__(message)
        self.worst_radius = worst_radius


class UnsupportedCombinationError(LabError):
    """Problem data outside the supported theory (e.g. general f with a point set)."""


class ConfigError(LabError, ValueError):
    """Malformed run configuration."""
