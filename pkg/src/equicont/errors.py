"""Exception hierarchy shared across the library."""


class EquicontError(Exception):
    """Base class for all library-specific errors."""


class GridSizeError(EquicontError, ValueError):
    """Grid construction rejected (odd node count, bad period, bad dimension)."""


class DegenerateOrbitError(EquicontError):
    """Kernel does not match the symmetry-orbit tangent space at the center."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class IllPosedComplementError(EquicontError):
    """Bordered matrix [L*S | Y] is numerically singular (complement collapsed)."""


class AmbiguousKernelError(EquicontError):
    """Singular spectrum has no clear gap around the kernel threshold."""


class NewtonConvergenceError(EquicontError):
    """Damped Newton failed to reach the requested residual."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class SingularBorderedError(EquicontError):
    """Bordered Newton matrix could not be factorized."""


class InitialPointError(EquicontError):
    """Continuation asked to start from a non-critical state."""


class StepUnderflowError(EquicontError):
    """Continuation step fell below the minimum step size."""


class OutOfActionDomainError(EquicontError):
    """Group element outside the domain of the local action."""


class SelfIntersectionError(EquicontError):
    """Graph curve failed the embeddedness check."""


class ChartExitError(EquicontError):
    """Curve left the domain of the metric chart."""


class NoVolumePrimitiveError(EquicontError):
    """Ambient carries no volume primitive (flat-torus obstruction pathway)."""


class UnsupportedDimensionError(EquicontError):
    """Operation only implemented for orbit dimensions 1 and 2."""


class ContourResidualError(EquicontError):
    """Degree computation found a (near-)zero of the residual on the contour."""


class UnknownProblemError(EquicontError, KeyError):
    """Catalog lookup failed."""

    def __init__(self, name, suggestion=None):
        msg = f"unknown problem {name!r}"
        if suggestion:
            msg += f" (did you mean {suggestion!r}?)"
        super().__init__(msg)
        self.name = name
        self.suggestion = suggestion


class ConfigError(EquicontError, ValueError):
    """Experiment configuration failed validation."""
