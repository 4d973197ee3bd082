"""Exception types shared by all modules."""


class ArtifactError(Exception):
    """Base class for every error raised by the toolkit."""


class DomainError(ArtifactError, ValueError):
    """An argument lies outside the region where an evaluator is valid."""


class PoleError(DomainError):
    """An argument is at, or too close to, a pole."""


class CapacityError(ArtifactError):
    """A table or work budget would be exceeded."""


class EvaluationError(ArtifactError, ArithmeticError):
    """An integrand produced a non-finite value."""


class PrecisionError(ArtifactError):
    """A certified error bound exceeds the requested tolerance."""

    def __init__(self, message, value=None, bound=None):
        super().__init__(message)
        self.value = value
        self.bound = bound


class ConvergenceError(ArtifactError):
    """An adaptive scheme hit its work cap before meeting its tolerance."""

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
