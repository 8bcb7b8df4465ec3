"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument is outside its documented domain."""


class GridError(ValueError):
    """A frequency grid is incompatible with the requested computation."""


class UndefinedRatioError(ValueError):
    """A ratio is requested for an input with zero total weight."""


class NonConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap.

    The best iterate found so far is attached as ``best``.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
