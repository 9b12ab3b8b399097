"""
Exceptions raised by the curvature library.

Input validation that is a plain misuse of an argument raises ``ValueError``;
the classes below flag numerical situations that a caller may want to catch
separately (a degenerate mesh, a metric losing definiteness, a solver that did
not reach its tolerance).
"""


class ReggeCurvError(RuntimeError):
    """Base class for all numerical failures of the library."""


class DegenerateMeshError(ReggeCurvError):
    """A triangle has non-positive signed area."""

    def __init__(self, triangle, area):
        self.triangle = int(triangle)
        self.area = float(area)
        super().__init__("Triangle {} has non-positive signed area {:.3e}".format(self.triangle, self.area))


class IndefiniteMetricError(ReggeCurvError):
    """The metric is not positive definite at some evaluation point."""

    def __init__(self, element, point, determinant):
        self.element = int(element)
        self.point = tuple(float(p) for p in point)
        self.determinant = float(determinant)
        super().__init__(
            "Metric is not positive definite on element {} at reference point ({:.6f}, {:.6f}) "
            "(det g = {:.3e})".format(self.element, self.point[0], self.point[1], self.determinant)
        )


class SingularMomentSystemError(ReggeCurvError):
    """A local moment (Gram) system could not be inverted reliably."""


class SolverError(ReggeCurvError):
    """A linear solve did not reach the requested tolerance."""

    def __init__(self, message, residual=None):
        self.residual = residual
        if residual is not None:
            message = "{} (relative residual {:.3e})".format(message, residual)
        super().__init__(message)


class ConfigurationError(ValueError):
    """An invalid study configuration was requested."""
