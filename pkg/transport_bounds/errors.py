"""Exception hierarchy shared by the library and the command-line tools."""

from typing import List, Sequence


class TransportBoundsError(Exception):
    """Base class for every error raised on purpose by this package."""


class DataValidationError(TransportBoundsError, ValueError):
    """Input data cannot be used as given."""

    def __init__(self, message: str, violations: Sequence[str] = ()):
        super().__init__(message)
        self.violations: List[str] = list(violations)


class SchemaError(DataValidationError):
    """A CSV file does not follow the expected header layout."""

    def __init__(self, message: str, column: str | None = None):
        super().__init__(message)
        self.column = column


class BasisError(DataValidationError):
    """Basis expansion failed for a given input row."""

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message)
        self.row = row


class EmptyLocationError(DataValidationError):
    """A simulated population has no units in one of the two locations."""


class SolverError(TransportBoundsError):
    """A numerical routine could not produce a trustworthy answer."""


class NonConvergenceError(SolverError):
    """The density-ratio optimizer stopped before meeting its balance tolerance."""


class SeparationError(SolverError):
    """A feature separates the source arm from the target location."""

    def __init__(self, message: str, feature: str):
        super().__init__(message)
        self.feature = feature


class LPInfeasibleError(SolverError):
    """Balanced linear program stays infeasible after tolerance relaxation."""

    def __init__(self, message: str, min_infeasibility: float):
        super().__init__(message)
        self.min_infeasibility = min_infeasibility


class BootstrapFailureError(SolverError):
    """Too many bootstrap replicates failed to produce bounds."""

    def __init__(self, message: str, failures: int, n_resamples: int):
        super().__init__(message)
        self.failures = failures
        self.n_resamples = n_resamples
