"""Exception types raised by the library."""


class GraphDataError(ValueError):
    """Input data violates a documented precondition.

    The CLI maps this to exit status 2.
    """


class ConvergenceError(RuntimeError):
    """An iterative solver did not reach its tolerance."""

    def __init__(self, message, iterations):
        super().__init__(message)
        self.iterations = iterations
