"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input violates a documented precondition."""


class ResourceError(RuntimeError):
    """Requested dense object exceeds the configured size cap."""


class ConvergenceError(RuntimeError):
    """An iterative procedure stopped before meeting its tolerance.

    Attributes
    ----------
    residual : float
        Best residual reached before giving up.
    """

    def __init__(self, message, residual=float("nan"), trajectory=None):
        super().__init__(message)
        self.residual = residual
        self.trajectory = trajectory


class SingularValueWarning(UserWarning):
    """Some normalized singular value lies below 1/kappa."""
