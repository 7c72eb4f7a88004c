"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """Raised for non-finite, out-of-range or malformed inputs."""


class FactorizationError(ArithmeticError):
    """The self-correlation matrix could not be factorized.

    Attributes:
        eigenvalue: smallest eigenvalue (by magnitude) found when the failure
            was diagnosed, or None when unknown.
        pivot: index of the failing Cholesky pivot, or None.
    """

    def __init__(self, message, eigenvalue=None, pivot=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue
        self.pivot = pivot


class ModelSingularError(ArithmeticError):
    """Fitting a kriging model failed because its weight system is singular."""

    def __init__(self, message, kappa=None):
        super().__init__(message)
        self.kappa = kappa


class RegularizationError(RuntimeError):
    """Every candidate length-scale vector produced a non-SPD matrix."""


class ParseError(ValueError):
    """A model, points or config file could not be parsed.

    The message carries the file/line/field context.
    """
