"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class BudgetError(RuntimeError):
    """An exhaustive computation would exceed its configured budget."""


class ValidationError(ValueError):
    """A matrix, vector or file failed structural validation."""


class ConfigurationError(ValueError):
    """A rule or scenario is configured inconsistently.

    ``round`` is set when the problem is only detected while executing a
    particular round.
    """

    def __init__(self, message, round=None):
        if round is not None:
            message = f"round {round}: {message}"
        super().__init__(message)
        self.round = round


class FaultBudgetError(ValueError):
    """More messages are missing than the fault budget allows."""


class IterationError(RuntimeError):
    """An iterative method did not converge within its iteration limit."""


class ScheduleError(ValueError):
    """A delay schedule returned a round index outside its window."""


class UnsolvableError(ValueError):
    """The requested model admits no approximate consensus algorithm."""


class EquivalenceError(AssertionError):
    """Two evaluation paths that must agree produced different values."""

    def __init__(self, message, process=None, round=None):
        super().__init__(message)
        self.process = process
        self.round = round
