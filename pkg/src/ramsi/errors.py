"""Exception types raised across the package."""


class RamsiError(Exception):
    """Base class for package errors."""


class DimensionError(RamsiError, ValueError):
    """Array shapes do not agree or a dimension is out of range."""


class ArgumentError(RamsiError, ValueError):
    """A scalar argument is outside its valid range."""


class ConvergenceError(RamsiError, ArithmeticError):
    """An iterative routine hit its iteration cap.

    The last iterate is kept on ``last_estimate`` so callers can decide
    whether it is usable.
    """

    def __init__(self, message, last_estimate=None):
        super().__init__(message)
        self.last_estimate = last_estimate


class DecompositionError(RamsiError, RuntimeError):
    """Support decomposition failed an internal counting identity."""


class ParseError(RamsiError, ValueError):
    """Malformed input file. ``row``/``column`` are 1-based file positions when known."""

    def __init__(self, message, row=None, column=None):
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.row = row
        self.column = column
