"""Exception hierarchy shared across the package."""


class BidAskError(Exception):
    """Base class for all library errors."""


class InvalidInputError(BidAskError, ValueError):
    """Raised when an argument violates a documented precondition."""


class InvalidStateError(BidAskError, ValueError):
    """Raised when an amplitude state is not normalized."""


class ParseError(BidAskError, ValueError):
    """Raised when an input file does not match its schema.

    ``line`` is the 1-based line number of the offending row, or None when
    the problem is not tied to a single row.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmptySeriesError(ParseError):
    """Raised when an input file holds no observations."""


class NonConvergenceError(BidAskError, RuntimeError):
    """Raised when every optimizer restart failed.

    The best point seen so far is kept on ``best`` (may be None).
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
