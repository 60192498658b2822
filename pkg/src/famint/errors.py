"""Exception hierarchy shared by every module."""


class FamintError(Exception):
    """Base class for all library errors."""


class InvalidInput(FamintError, ValueError):
    """Malformed or out-of-contract input."""


class NonTrivialityError(InvalidInput):
    """A measure would give the top element measure zero."""


class AdditivityFailure(FamintError):
    """A set function violates finite additivity.

    ``witness`` holds an incompatible pair ``(a, b)`` with
    ``value(a | b) != value(a) + value(b)``.
    """

    def __init__(self, message, witness):
        super().__init__(message)
        self.witness = witness


class ZeroMeasureError(FamintError, ZeroDivisionError):
    """Conditioning on an element of measure zero."""


class CoverageFailure(FamintError):
    """An ultrafilter list leaves some nonzero element uncovered."""

    def __init__(self, message, element):
        super().__init__(message)
        self.element = element


class InvalidFunction(FamintError):
    """A range oracle reported an unbounded or inverted range."""


class HypothesisViolation(FamintError):
    """The hypotheses of a transfer identity do not hold."""

    def __init__(self, message, element=None):
        super().__init__(message)
        self.element = element


class PreconditionFailure(FamintError):
    """An operation was called on input it cannot certify."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
