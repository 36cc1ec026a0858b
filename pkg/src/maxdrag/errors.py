"""Exception types shared across the package."""


class MaxdragError(Exception):
    pass


class InvalidParameterError(MaxdragError, ValueError):
    """A shape or solver parameter is outside its admissible range."""


class InvalidCavityError(InvalidParameterError):
    """A boundary chain does not form a standard cavity."""


class ConvergenceError(MaxdragError, RuntimeError):
    """An iterative refinement exhausted its budget.

    The last estimate reached is kept on ``.estimate``.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate
