"""Exception hierarchy. CLI exit codes map onto these classes."""


class QKramersError(Exception):
    exit_code = 3


class DomainError(QKramersError, ValueError):
    """Argument outside the mathematical domain of an operation."""

    exit_code = 2


class ConfigError(QKramersError, ValueError):
    exit_code = 2


class NumericError(QKramersError, ArithmeticError):
    """A numerical procedure failed; ``diagnostics`` carries the details."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConvergenceError(NumericError):
    pass


class DegenerateRootError(NumericError):
    pass


class StructuralError(NumericError):
    """Coefficients that make the rate construction meaningless (e.g. no root with Lambda > 0)."""


class IntegrationError(NumericError):
    pass


class EstimateUnavailableError(NumericError):
    pass
