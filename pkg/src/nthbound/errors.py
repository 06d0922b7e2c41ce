"""Exception hierarchy.

Every error raised on purpose by this package derives from
:class:`NthboundError`, so the CLI can serialize it into a report
instead of printing a traceback.
"""


class NthboundError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(NthboundError, ValueError):
    pass


class NotSymmetric(NthboundError, ValueError):
    pass


class NotPositiveDefinite(NthboundError, ValueError):
    pass


class NotIsometry(NthboundError, ValueError):
    pass


class NotUnimodular(NthboundError, ValueError):
    pass


class RankNotTwo(NthboundError, ValueError):
    pass


class NoConvergence(NthboundError, ArithmeticError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class UnknownLabel(NthboundError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class SupportIncludesIdentity(NthboundError, ValueError):
    pass


class InvalidMeasure(NthboundError, ValueError):
    pass


class NoNonIdentityAction(NthboundError, ValueError):
    pass


class NotReduced(NthboundError, ValueError):
    pass


class InvalidComponent(NthboundError, ValueError):
    pass


class EqualVectors(NthboundError, ValueError):
    pass


class BudgetExceeded(NthboundError, RuntimeError):
    pass


class ParseError(NthboundError, ValueError):
    """Malformed input text. Carries 1-based ``line``/``column`` when known."""

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class SchemaError(NthboundError, ValueError):
    """Well-formed input that violates the datum schema.

    ``errors`` is a list of ``(field_path, message)`` pairs.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(f"{path}: {msg}" for path, msg in self.errors))


class DimensionError(SchemaError):
    pass
