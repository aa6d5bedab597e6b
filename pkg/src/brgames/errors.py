"""Exception hierarchy shared by every module."""


class BRGError(Exception):
    """Base class for all package errors."""


class GameValidationError(BRGError, ValueError):
    pass


class DimensionMismatchError(GameValidationError):
    pass


class NonStochasticRowError(GameValidationError):
    """A probability vector is negative somewhere or does not sum to one.

    ``where`` names the offending tensor and ``index`` the slice, e.g.
    ``("transition", (2, 0, 1))``.
    """

    def __init__(self, where, index, total):
        self.where = where
        self.index = index
        self.total = total
        super().__init__(f"{where}{list(index)} is not a probability vector (sum={total!r})")


class InvalidDiscountError(GameValidationError):
    pass


class ShapeMismatchError(BRGError, ValueError):
    pass


class InvalidAlphaError(BRGError, ValueError):
    pass


class SingularSystemError(BRGError, ArithmeticError):
    pass


class NonFiniteObjectiveError(BRGError, ArithmeticError):
    """Raised when a solver iterate produces NaN/Inf, usually a too-large learning rate."""


class GameParseError(BRGError, ValueError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
