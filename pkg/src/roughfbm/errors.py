"""Exception hierarchy shared by all modules."""


class RoughFbmError(Exception):
    """Base class for library errors."""


class DomainError(RoughFbmError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class NumericalError(RoughFbmError, ArithmeticError):
    """A computation produced non-finite values or a non-PSD matrix."""


class ConvergenceError(NumericalError):
    """An iterative or refining procedure failed to reach its tolerance.

    ``history`` carries whatever diagnostic sequence the caller produced
    (successive differences, fixed-point gaps, ...).
    """

    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)
