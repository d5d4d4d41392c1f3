"""Exception hierarchy shared by all modules."""


class QPSError(Exception):
    """Base class for every error raised by the package."""


class InvalidModel(QPSError, ValueError):
    pass


class InvalidParameter(QPSError, ValueError):
    pass


class SingularPhase(QPSError, ArithmeticError):
    """Potential evaluated at (or too close to) a pole."""


class StripViolation(QPSError, ValueError):
    """Imaginary phase offset outside the analyticity strip."""


class Unbounded(QPSError, ValueError):
    pass


class ConvergenceFailure(QPSError, RuntimeError):
    pass


class ResolventSingular(QPSError, ArithmeticError):
    pass


class DegenerateEdge(QPSError, ValueError):
    pass


class NotLocalized(QPSError, ValueError):
    pass


class NotNormalized(QPSError, ValueError):
    pass


class FitFailure(QPSError, RuntimeError):
    pass


class NoResolvedStates(QPSError, RuntimeError):
    pass


class ConfigError(QPSError, ValueError):
    """Bad sweep or CLI configuration; detected before any computation."""
