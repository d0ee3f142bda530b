"""Exception types shared across the pipeline.

The CLI maps these onto exit codes: DomainError -> 1, NumericalError -> 2.
"""


class DomainError(ValueError):
    """Input outside the domain of an operation."""


class NumericalError(ArithmeticError):
    """A numerical procedure failed to reach its target."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class StiffnessError(NumericalError):
    """Explicit integration stalled; ``t_fail`` is where it gave up."""

    def __init__(self, message, t_fail):
        super().__init__(message)
        self.t_fail = t_fail


class InsufficientDataError(NumericalError):
    """Too few points (or peaks) in a fit window."""
