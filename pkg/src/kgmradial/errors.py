"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class InfeasibleError(ValueError):
    """The coercivity system has no admissible auxiliary parameter."""


class AdmissibilityError(ValueError):
    """Model parameters fail the existence hypotheses for constant potentials."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class GridMismatchError(ValueError):
    """Two fields live on different grids."""


class NumericalError(RuntimeError):
    """An iterative method or quadrature did not reach its tolerance."""

    def __init__(self, message, history=None, **diagnostics):
        super().__init__(message)
        self.history = list(history) if history is not None else []
        self.diagnostics = diagnostics


class GeometryError(RuntimeError):
    """The functional does not become negative along a ray within the doubling cap."""
