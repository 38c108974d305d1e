"""Exception types raised across the package."""


class JetGeoError(Exception):
    """Base class for all package errors."""


class InvalidInput(JetGeoError, ValueError):
    pass


class DomainError(InvalidInput):
    """Parameters fall outside the admissible domain."""


class DegenerateDiscriminant(DomainError):
    pass


class NoHillInterval(DomainError):
    pass


class InvalidInterval(InvalidInput):
    pass


class ZeroGradient(InvalidInput):
    pass


class NonIntegrable(InvalidInput):
    """The integrand has a non-integrable singularity on the interval."""


class NumericalFailure(JetGeoError, ArithmeticError):
    pass


class NonConvergence(NumericalFailure):
    pass


class StepUnderflow(NumericalFailure):
    pass


class DegenerateJacobian(NumericalFailure):
    pass


class ToleranceNotMet(NumericalFailure):
    """Adaptive quadrature hit its panel budget; carries the best estimate."""

    def __init__(self, msg, value=None, error=None):
        super().__init__(msg)
        self.value = value
        self.error = error
