"""Exception hierarchy.

Every error raised by the package derives from :class:`BuckleyOsthusError`;
the CLI maps the subclasses onto exit codes.
"""


class BuckleyOsthusError(Exception):
    """Base class for all package errors."""


class ParameterError(BuckleyOsthusError, ValueError):
    """A model or operation parameter is outside its admissible range."""


class ConsistencyError(BuckleyOsthusError, ValueError):
    """Two objects that must agree (e.g. a sequence and its parameters) do not."""


class DomainError(BuckleyOsthusError, ValueError):
    """A numeric function was evaluated outside its domain."""


class UnsupportedError(BuckleyOsthusError, NotImplementedError):
    """The operation is defined only for a subset of the model family."""


class BudgetError(BuckleyOsthusError, RuntimeError):
    """A computation would exceed its configured resource budget."""


class TruncationError(BudgetError):
    """A series could not be truncated to the requested tolerance within budget.

    Attributes
    ----------
    partial_sum : float
        Best partial sum reached.
    certificate : float
        Tail bound at the point the budget ran out.
    """

    def __init__(self, message, partial_sum=float("nan"), certificate=float("inf")):
        super().__init__(message)
        self.partial_sum = partial_sum
        self.certificate = certificate
