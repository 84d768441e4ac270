"""Exception hierarchy shared by every module.

Each class maps onto one failure category of the public contracts so that the
command line front end can translate exceptions into exit codes.
"""


class MapGroupError(Exception):
    """Base class for all library errors."""


class InvalidArgumentError(MapGroupError, ValueError):
    """Input violates a precondition (shape, finiteness, membership, ...)."""


class BranchCutError(MapGroupError, ValueError):
    """A principal logarithm was requested for a matrix with spectrum on the cut."""


class GeometryError(MapGroupError, ValueError):
    """Domain geometry is too degenerate for floating point constructions."""


class PrecisionError(MapGroupError, ArithmeticError):
    """A quantity expected to be an integer/lattice point is not close enough to one."""


class NumericBlowupError(MapGroupError, ArithmeticError):
    """Non-finite values appeared while integrating."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class EvaluationError(MapGroupError, ArithmeticError):
    """A form or expression could not be evaluated (pole, overflow)."""

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class PoleError(EvaluationError):
    """Division by zero inside an expression."""


class AmbiguityError(MapGroupError):
    """A value depends on a path choice that the caller did not make."""


class SamplingResolutionError(MapGroupError, ValueError):
    """Neighbouring samples of a group-valued map are too far apart."""


class UnsupportedClassificationError(MapGroupError, NotImplementedError):
    """The exponential-image question is not decided for this group."""


class ParseError(MapGroupError, ValueError):
    """Syntax or name error in an expression, with position information."""

    def __init__(self, message, line=1, column=1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class SchemaError(MapGroupError, ValueError):
    """A problem file does not follow the expected schema."""
