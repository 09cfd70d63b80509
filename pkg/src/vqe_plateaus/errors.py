"""Exception hierarchy shared by every module."""


class VqeError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(VqeError, ValueError):
    """A parameter, option or configuration value is outside its domain."""


class ShapeError(VqeError, ValueError):
    """Operands have incompatible dimensions (qubit counts, vector lengths)."""


class ParseError(VqeError, ValueError):
    """A Hamiltonian or parameter file could not be read."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NumericalError(VqeError, ArithmeticError):
    """A numerical routine failed (non-finite values, non-convergence)."""

    def __init__(self, message: str, residual: float | None = None, iteration: int | None = None):
        self.residual = residual
        self.iteration = iteration
        super().__init__(message)


class UndefinedRatioError(NumericalError):
    """Variance ratio requested with a zero baseline variance."""
