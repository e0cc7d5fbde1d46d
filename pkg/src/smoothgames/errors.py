"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Array shapes do not fit the operation (non-square, wrong length, ...)."""


class NumericalError(ArithmeticError):
    """A numerical routine failed or produced non-finite values."""

    def __init__(self, message, matrix=None):
        super().__init__(message)
        self.matrix = matrix


class HypothesisError(ValueError):
    """Inputs violate the assumptions under which a result holds (e.g. Re(lambda) <= 0)."""


class OutOfRangeError(ValueError):
    """A parameter lies outside the range where a bound is guaranteed."""


class DegenerateEigenvalueError(ArithmeticError):
    """The quantity is undefined because 1 - eta * lambda vanishes."""


class NoEquilibriumError(ValueError):
    """The game has no stationary point."""


class GameSpecError(ValueError):
    """Malformed game document. ``pointer`` is the JSON pointer of the offending field."""

    def __init__(self, message, pointer=""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer
