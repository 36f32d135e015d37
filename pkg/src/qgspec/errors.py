"""Exception types shared by the solvers."""


class InvalidArgumentError(ValueError):
    """A parameter is outside its admissible range."""


class UnsupportedVariantError(NotImplementedError):
    """The requested operation is not defined for this coupling variant."""


class NumericSingularityError(ArithmeticError):
    """A linear solve hit a (numerically) singular matrix."""

    def __init__(self, message: str, k: float | None = None):
        super().__init__(message)
        self.k = k


class NumericFailureError(RuntimeError):
    """An iterative procedure (bisection, local refinement) did not converge."""
