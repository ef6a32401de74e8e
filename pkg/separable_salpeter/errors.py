"""
Exception hierarchy for the separable Salpeter solver.

Every error carries the exit code the command-line front end reports for it.
"""


class SalpeterError(Exception):
    """Base class for all solver errors."""

    exit_code = 1


class InvalidParameter(SalpeterError):
    """A problem, profile or command parameter is outside its domain."""

    exit_code = 3

    def __init__(self, field, message=None):
        self.field = field
        super().__init__(message or f"invalid value for '{field}'")


class InvalidIntegrand(SalpeterError):
    """An integrand returned NaN or an infinite sample."""

    exit_code = 4


class ConvergenceFailure(SalpeterError):
    """An iterative method ran out of budget before meeting its tolerance."""

    exit_code = 4

    def __init__(self, message, best_estimate=None, error_estimate=None):
        self.best_estimate = best_estimate
        self.error_estimate = error_estimate
        super().__init__(message)


class ThresholdViolation(SalpeterError):
    """An energy at or above the continuum threshold E = m was requested."""

    exit_code = 3


class NoBoundState(SalpeterError):
    """The coupling is too weak for the problem to bind."""

    exit_code = 2

    def __init__(self, message, critical_coupling=None):
        self.critical_coupling = critical_coupling
        super().__init__(message)


class MinimizationFailure(SalpeterError):
    """No interior minimum could be bracketed."""

    exit_code = 4
