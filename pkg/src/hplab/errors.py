"""Exception types shared across the package."""


class HypothesisError(ValueError):
    """A parameter set violates the hypothesis of the inequality it instantiates."""


class SupportError(ValueError):
    """A test function is not supported inside the domain."""


class ConvergenceError(RuntimeError):
    """An iterative solver stopped before reaching its tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
