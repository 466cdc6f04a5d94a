"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested quantity."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature ran out of subdivisions before meeting tolerance."""

    def __init__(self, message: str, estimate: float, error_bound: float):
        super().__init__(f"{message} (estimate={estimate!r}, bound={error_bound!r})")
        self.estimate = estimate
        self.error_bound = error_bound


class ConvergenceError(RuntimeError):
    """An iterative solver failed to converge."""


class InconsistencyError(ArithmeticError):
    """A quantity that must be a variance came out negative."""
