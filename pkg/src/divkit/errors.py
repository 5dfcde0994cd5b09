"""Exception hierarchy shared across divkit."""


class DivkitError(Exception):
    """Base class for all divkit errors."""


class DomainError(DivkitError, ValueError):
    """An argument lies outside the mean domain of a variance function.

    ``argument`` names the offending parameter (``"x"``, ``"mu"``, ...) when
    known, so callers such as the CLI can report it.
    """

    def __init__(self, message, argument=None, value=None):
        super().__init__(message)
        self.argument = argument
        self.value = value


class PositivityError(DomainError):
    """A custom variance function evaluated to a non-positive value."""


class InfiniteResultError(DivkitError, ArithmeticError):
    """The requested quantity diverges (e.g. gamma divergence at x=0)."""


class ConvergenceError(DivkitError, RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class IntegrandError(DivkitError, ArithmeticError):
    """The integrand produced NaN or Inf at ``abscissa``."""

    def __init__(self, message, abscissa):
        super().__init__(message)
        self.abscissa = abscissa


class NotDecomposableError(DivkitError, ValueError):
    """The variance function lacks the decomposition a law relies on."""


class UnsupportedError(DivkitError, ValueError):
    """The requested analytic path does not exist for these parameters."""


class SamplerDriftError(DivkitError, RuntimeError):
    """Monte Carlo sample mean drifted away from the declared mean."""


class ExpressionSyntaxError(DivkitError, ValueError):
    """Malformed variance-function expression; ``offset`` is a byte offset."""

    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(ExpressionSyntaxError):
    pass
