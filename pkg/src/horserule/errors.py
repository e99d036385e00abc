"""Exception types raised by the public API and mapped to CLI exit codes."""


class HorseRuleError(Exception):
    """Base class for all errors raised by this package."""


class DataError(HorseRuleError):
    """Malformed or unusable input data (bad CSV, schema mismatch, bad shapes)."""


class NumericError(HorseRuleError):
    """A numerical operation failed (non-finite values, singular system)."""


class ConvergenceError(NumericError):
    """An iterative routine hit its iteration cap before converging."""

    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations
