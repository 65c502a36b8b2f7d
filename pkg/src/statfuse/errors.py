"""Exception types raised by statfuse."""


class StatfuseError(Exception):
    """Base class for all library errors."""


class DimensionError(StatfuseError, ValueError):
    """Input grids have incompatible shapes."""


class DegenerateInput(StatfuseError, ValueError):
    """A metric denominator vanished (constant band, identical bands, ...)."""


class ShapeError(StatfuseError, ValueError):
    """Band count not representable in the requested file format."""


class ParseError(StatfuseError, ValueError):
    """Malformed Netpbm file."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class RangeError(StatfuseError, ValueError):
    """A stored sample exceeds the declared maxval."""


class NumericError(StatfuseError, ArithmeticError):
    """A computation produced non-finite values."""
