"""Exception types shared across the package."""


class DegenerateSubspaceError(ValueError):
    """A trial basis turned out to be (numerically) rank deficient.

    Carries the detected rank in :attr:`rank`.
    """

    def __init__(self, message, rank):
        super().__init__(message)
        self.rank = rank


class MatrixMarketError(ValueError):
    """Malformed Matrix Market input; :attr:`line` is the 1-based line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class IntervalError(ValueError):
    """A value fell outside the spectral interval it was bracketed against."""


class StationaryPointError(ValueError):
    """The vector is (numerically) an eigenvector, so no search cone exists."""


class NumericFailure(RuntimeError):
    """An iteration produced non-finite or non-monotone values."""
