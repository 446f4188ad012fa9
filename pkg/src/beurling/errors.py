"""Exception hierarchy shared by the library and the command line driver."""


class BeurlingError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(BeurlingError, ValueError):
    """Arguments of the wrong kind, shape or range."""


class ConstructionError(BeurlingError):
    """A weight or auxiliary object cannot be built from the given input."""


class DomainError(BeurlingError, ValueError):
    """A function is evaluated outside of its domain (e.g. A**0.5 of an indefinite A)."""


class NumericalError(BeurlingError, ArithmeticError):
    """An iterative or scaled computation failed numerically.

    ``estimate`` carries the best value reached before the failure, if any.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class SingularKernelError(NumericalError):
    """LU factorization met a pivot below the singularity threshold."""

    def __init__(self, message, step):
        super().__init__(message)
        self.step = step


class ConvergenceError(NumericalError):
    """A finite-section computation did not reach the requested residual."""

    def __init__(self, message, residual):
        super().__init__(message, estimate=residual)
        self.residual = residual


class ConfigError(BeurlingError):
    """Invalid experiment configuration; ``problems`` lists every violation found."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
