"""
Domain exceptions for the shuffle-poset engine.
Rejected input subclasses ValueError, runtime failures subclass RuntimeError.
"""


class InvalidWordError(ValueError):
    """A letter sequence violates the shuffle property or the context bounds."""


class OrderViolationError(ValueError):
    """An interval [u, v] was requested with u not below v."""


class GradingError(ValueError):
    """A cover relation does not produce a graded poset with 0̂ and 1̂."""


class DecodeError(ValueError):
    """A label sequence does not correspond to any maximal chain."""


class InconsistentTypeError(ValueError):
    """A shuffle type violates the factor-count relations."""


class NonUnitSeriesError(ValueError):
    """A series without unit constant term was inverted or convolved."""


class SizeLimitExceeded(RuntimeError):
    """A computation was refused because the input exceeds a configured cap."""


class InvariantViolation(RuntimeError):
    """A structural property that must hold was found to fail."""
