"""Exception and warning classes shared across the package."""


class BargmannError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(BargmannError, ValueError):
    """An argument is outside the range an operation accepts."""


class EvaluationError(BargmannError):
    """A user-supplied function returned a non-finite value at a quadrature node."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class SingularityError(BargmannError, ZeroDivisionError):
    """Evaluation requested at (or numerically on top of) a singular point."""


class DomainError(BargmannError, ValueError):
    """A closed form was requested outside the region where it holds."""


class ConvergenceRegionError(BargmannError, ValueError):
    """A defining integral diverges at the requested point; use the continuation."""


class AccuracyError(BargmannError):
    """A numerical limit did not converge to the requested tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class IntegrationBlowUp(BargmannError, FloatingPointError):
    """The trajectory integrator produced a non-finite state."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class RootNotFound(BargmannError):
    """Newton shooting did not reach the boundary condition."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ContractError(BargmannError):
    """An input violates a documented precondition (e.g. boundary mismatch)."""


class DegenerateSaddle(BargmannError):
    """The conjugate saddle Jacobian M_uv vanishes.

    ``fallback`` holds the exact Laplace integral of the linear-exponent
    propagator when it could be computed, otherwise ``None``.
    """

    def __init__(self, message, fallback=None):
        super().__init__(message)
        self.fallback = fallback


class FocalPointError(BargmannError):
    """The Bargmann prefactor 1/M_vv diverges; switch to the conjugate route."""


class EmptyTrajectorySum(BargmannError):
    """None of the supplied initial guesses converged."""


class FocalPointWarning(UserWarning):
    """|M_vv| is close to zero where Newton converged."""


class ReliabilityWarning(UserWarning):
    """A quadrature-based result was requested outside its reliable region."""
