"""Exception types shared across the package.

The CLI maps these onto process exit codes.
"""


class ArtifactError(Exception):
    """Base class for package errors."""

    exit_code = 1


class DomainError(ArtifactError, ValueError):
    """Input outside the domain where an operation is defined."""

    exit_code = 2


class ValidationError(ArtifactError, ValueError):
    """Malformed configuration or parameters."""

    exit_code = 2


class CapacityError(ArtifactError, ValueError):
    """Requested problem size exceeds a hard memory bound."""

    exit_code = 2


class NumericalFailure(ArtifactError, RuntimeError):
    """A solver failed to converge or became unstable.

    ``history`` holds whatever diagnostic trace the solver produced, e.g.
    residual norms per iteration.
    """

    exit_code = 3

    def __init__(self, message, history=None, last_good=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []
        self.last_good = last_good


class ExtinctionError(ArtifactError, RuntimeError):
    """Every clone in a population died."""

    exit_code = 4

    def __init__(self, message, time):
        super().__init__(message)
        self.time = time
