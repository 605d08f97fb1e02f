"""Exception hierarchy shared across the package."""


class MimoJsccError(Exception):
    """Base class for all package errors."""


class DimensionError(MimoJsccError, ValueError):
    """Operand shapes are incompatible."""


class SingularMatrixError(MimoJsccError, ArithmeticError):
    """A matrix expected to be Hermitian positive definite is not."""


class PowerConstraintError(MimoJsccError, ValueError):
    """A transmit frame exceeds its energy budget."""


class SchemeError(MimoJsccError, ValueError):
    """A space-time scheme is used with the wrong antenna count or receiver."""


class DegenerateInputError(MimoJsccError, ValueError):
    """Input carries no usable energy (e.g. an all-zero latent)."""


class ConfigError(MimoJsccError, ValueError):
    """Experiment configuration is invalid."""


class InsufficientTrialsError(MimoJsccError, ValueError):
    """A Monte Carlo estimate has too few events to be meaningful."""
