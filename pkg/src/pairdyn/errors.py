"""Exception types shared across the package."""


class ValidationError(ValueError):
    """A configuration or input value violates a documented precondition."""


class PropagationError(RuntimeError):
    """Krylov propagation failed to converge.

    Carries the last local error estimate and, when raised from a row
    computation, the row that failed.
    """

    def __init__(self, message, last_error=None, row=None):
        super().__init__(message)
        self.last_error = last_error
        self.row = row
