"""Exception types shared across the package.

The CLI maps these onto its exit-code contract: usage/parse problems exit
with 2, domain or solver failures with 1.
"""


class FracmemError(Exception):
    """Base class for all package errors."""


class ParameterError(FracmemError, ValueError):
    """Invalid scalar parameter (domain spec, exponent, fraction, ...)."""


class EmptyDomainError(FracmemError, ValueError):
    """Grid construction produced zero inside cells."""


class ShapeError(FracmemError, ValueError):
    """Field does not match the grid it is used with."""


class CompatibilityError(FracmemError, ValueError):
    """Half-space reflection is not lattice-exact on this grid."""


class DomainShapeError(FracmemError, ValueError):
    """Operation requires a mask shape the grid does not have."""


class SpecError(FracmemError, ValueError):
    """Invalid weight-class step specification."""


class AssumptionError(FracmemError, ValueError):
    """Eigenproblem assumption violated (e.g. no positive weight mass)."""


class CoercivityError(FracmemError, RuntimeError):
    """Quadratic form is not positive definite for the given potential."""


class NoPositiveDirectionError(FracmemError, RuntimeError):
    """No direction with positive weighted mass; smallest eigenvalue undefined."""


class DenominatorError(FracmemError, ValueError):
    """Rayleigh quotient evaluated at a field with nonpositive weighted mass."""


class SizeLimitError(FracmemError, ValueError):
    """Problem exceeds the dense desk-scale size limit."""
