"""Exception hierarchy for weyl3."""


class Weyl3Error(Exception):
    """Base class for every error raised by this package."""


# jets
class CenterMismatch(Weyl3Error):
    pass


class DivisionByZeroValue(Weyl3Error, ZeroDivisionError):
    pass


class DomainError(Weyl3Error, ValueError):
    pass


class OrderExceeded(Weyl3Error):
    pass


# fields
class ExpressionSyntaxError(Weyl3Error, ValueError):
    """Malformed expression. ``offset`` is the byte offset of the offending token."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnknownIdentifier(ExpressionSyntaxError):
    pass


class NonIntegerExponent(ExpressionSyntaxError):
    pass


# geometry
class SingularCoframe(Weyl3Error):
    pass


class LinearSolveSingular(Weyl3Error):
    pass


class ZeroVector(Weyl3Error):
    pass


class SingularMetric(Weyl3Error):
    pass


# holonomy
class NotInCO(Weyl3Error):
    pass


class EmptySampleSet(Weyl3Error):
    pass


# families
class MissingField(Weyl3Error):
    pass


class DomainGuardViolated(Weyl3Error):
    pass
