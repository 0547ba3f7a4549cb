"""Exception hierarchy shared by all modules."""


class LogEITError(Exception):
    """Base class for every error raised by this package."""


class AliasingError(LogEITError, ValueError):
    """Basis order too large for the boundary quadrature."""


class SingularSystemError(LogEITError, ArithmeticError):
    """The stiffness system could not be factorized (inadmissible conductivity)."""


class DefinitenessError(LogEITError, ArithmeticError):
    """A matrix expected to be positive definite has an eigenvalue <= 0."""


class DomainError(LogEITError, ValueError):
    """A spectral function was requested outside its domain."""


class ContourError(LogEITError, ValueError):
    """No admissible integration contour exists for the requested spectrum."""


class ConvergenceError(LogEITError, ArithmeticError):
    """A quadrature did not reach its declared tolerance."""


class OrderCapError(LogEITError, ValueError):
    """Derivative order above the supported cap."""


class DegenerateFitError(LogEITError, ArithmeticError):
    """Too few usable points to fit a slope (roundoff floor reached)."""


class PlateauError(LogEITError, ValueError):
    """Shift grid extends below the resolvable range of the discrete spectrum."""


class InputOrderError(LogEITError, ValueError):
    """Two conductivities were expected to be pointwise ordered but are not."""


class ContractionError(LogEITError, ValueError):
    """The perturbation operator is not a contraction."""


class ConfigError(LogEITError, ValueError):
    """Malformed or unknown run configuration."""


class ExperimentFailure(LogEITError):
    """One or more pass/fail gates of an experiment failed."""
