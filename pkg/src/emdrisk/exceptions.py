"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`EMDError`,
so callers (the CLI, the calibration runner) can catch the whole family
without swallowing programming errors.
"""


class EMDError(Exception):
    """Base class for all library errors."""


class InvalidLossError(EMDError, ValueError):
    pass


class InsufficientSamplesError(EMDError, ValueError):
    pass


class DomainError(EMDError, ValueError):
    pass


class IncompatiblePPFError(EMDError, ValueError):
    pass


class SolverError(EMDError, ArithmeticError):
    """Raised when the beta-parameter root solve does not converge.

    Attributes
    ----------
    r, v : float
        The (clamped) inputs of the failed solve.
    residuals : tuple of float
        Last residuals of the two equations.
    """

    def __init__(self, r, v, residuals):
        self.r = r
        self.v = v
        self.residuals = tuple(residuals)
        super().__init__(
            f"solver failure at r={r!r}, v={v!r}; last residuals={self.residuals!r}")


class DegenerateEndpointsError(EMDError, RuntimeError):
    def __init__(self, c, retries):
        self.c = c
        self.retries = retries
        super().__init__(
            f"degenerate endpoints: q(0) < q(1) not reached after {retries} draws (c={c!r})")


class ThresholdError(EMDError, ValueError):
    pass


class SingularLikelihoodError(EMDError, ValueError):
    pass


class GainTooLargeError(EMDError, OverflowError):
    pass


class InsufficientExperimentsError(EMDError, ValueError):
    pass


class CalibrationError(EMDError, RuntimeError):
    """Too many experiments of a calibration run failed."""

    def __init__(self, message, failures=()):
        self.failures = list(failures)
        super().__init__(message)


class InputFileError(EMDError, ValueError):
    """Problem with a user-supplied file; the message names the file and row."""
