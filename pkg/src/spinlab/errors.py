"""Exception types shared across spinlab."""


class SpinlabError(Exception):
    """Base class for all spinlab errors."""


class DomainError(SpinlabError, ValueError):
    """Argument outside the domain of a function (e.g. |x| >= 1 at a pole)."""


class SolverError(SpinlabError, RuntimeError):
    """A root finder or Newton solve failed to converge."""

    def __init__(self, message, best_residual=None):
        super().__init__(message)
        self.best_residual = best_residual


class RegimeError(SpinlabError, ValueError):
    """Requested regime does not match the classification of (beta, h)."""


class DegenerateCurvatureError(SpinlabError, ValueError):
    """A maximizer has (numerically) vanishing curvature where a formula needs H'' < 0."""


class SizeError(SpinlabError, ValueError):
    """Problem too large for the requested exact method."""
