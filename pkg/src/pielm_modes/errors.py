"""Exception hierarchy shared across the package."""


class PielmError(Exception):
    """Base class for all package errors."""


class DomainError(PielmError, ValueError):
    """A coordinate, degree, or derivative order lies outside its valid range."""


class ConfigurationError(PielmError, ValueError):
    """Problem/basis/collocation combination cannot be assembled."""


class AssemblyError(PielmError):
    """Non-finite feature values or a degenerate constraint row."""


class NumericalError(PielmError):
    """Base for failures in the linear-algebra stages."""


class TrivialAdmissibleSpaceError(NumericalError):
    """Boundary constraints leave no free coefficients."""


class NotSPDError(NumericalError):
    """Reduced Gram matrix is not symmetric positive definite."""

    def __init__(self, message: str, min_eigenvalue: float):
        super().__init__(f"{message} (smallest eigenvalue estimate {min_eigenvalue:.3e})")
        self.min_eigenvalue = min_eigenvalue


class InsufficientModesError(NumericalError):
    """Fewer physical modes survived filtering than were requested."""


class DegenerateModeError(NumericalError):
    """A reconstructed mode vanishes on the reporting grid."""
