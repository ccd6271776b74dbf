"""Exception types raised by lgwfbst."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class SolverError(RuntimeError):
    """A root finder did not converge.

    The last residual is kept on ``residual`` for diagnostics.
    """

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class InitializationError(RuntimeError):
    """The chain cannot start from a point of zero posterior density."""


class OptimizerError(RuntimeError):
    """Every start of a constrained maximization failed."""

    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = list(trace)


class CalibrationError(RuntimeError):
    """Censoring rate calibration could not bracket the target."""


class PexeFitError(ValueError):
    """The piecewise exponential estimator needs at least one death."""


class DataError(ValueError):
    """Malformed survival data file."""

    def __init__(self, message, lines=()):
        super().__init__(message)
        self.lines = list(lines)
