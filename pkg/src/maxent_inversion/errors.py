"""Exception types raised across the package."""


class MaxEntError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(MaxEntError, ValueError):
    """A natural parameter lies outside the activation domain of its prior."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class RangeError(MaxEntError, ValueError):
    """A mean value lies on or outside the boundary of its data range."""


class UnsupportedModel(MaxEntError, ValueError):
    pass


class ShapeError(MaxEntError, ValueError):
    pass


class RankError(MaxEntError, ValueError):
    pass


class NumericalError(MaxEntError, ArithmeticError):
    pass


class InfeasibleSuspected(MaxEntError):
    """The solver diverged in a way that indicates z has no interior preimage.

    The best iterate reached is attached as ``result``.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class MaxIterationsWarning(RuntimeWarning):
    pass


class NotPositiveDefinite(MaxEntError, ValueError):
    pass


class DegenerateSlab(MaxEntError):
    pass


class ParseError(MaxEntError, ValueError):
    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class FormatError(MaxEntError, ValueError):
    pass


class TruncatedFile(FormatError):
    pass
